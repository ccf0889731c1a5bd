import numpy as np
import pytest

from emduality.cli import run


@pytest.fixture
def a_translation(tmp_path):
    path = tmp_path / "a.txt"
    path.write_text("1 0\n1 1\n")
    return str(path)


@pytest.fixture
def bundle_file(tmp_path):
    theta = 0.7
    c, s = np.cos(theta), np.sin(theta)
    path = tmp_path / "bundle.txt"
    path.write_text(f"nv = 1\ngenerator = {c} {-s} {s} {c}\n")
    return str(path)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "grid.cfg"
    path.write_text(
        "model = identity-tau\n"
        "extents = -0.4:0.4 -0.4:0.4 -0.4:0.4 -0.4:0.4\n"
        "resolution = 7 7 7 7\n"
        "metric = minkowski\n"
        "phi = constant 0.1 1.2\n"
        "field = terms\n"
        "field_term = 0 0 1 0.3 0 0 0 0\n")
    return str(path)


class TestModels:
    def test_list(self):
        code, text = run(["models", "list"])
        assert code == 0
        assert "t3" in text and "axio-dilaton" in text

    def test_show(self):
        code, text = run(["models", "show", "axio-dilaton"])
        assert code == 0
        assert "nv = 2" in text

    def test_show_unknown_exit_2(self):
        code, _ = run(["models", "show", "unknown"])
        assert code == 2

    def test_unknown_command_exit_2(self):
        code, _ = run(["frobnicate"])
        assert code == 2


class TestAlgebraCommands:
    def test_stabilizer_axio_dilaton(self):
        code, text = run(["stabilizer", "--model", "axio-dilaton"])
        assert code == 0
        assert "check dim_stab_sp = 1" in text
        assert "minus_id_fixes_period = true" in text

    def test_uduality_t3(self):
        code, text = run(["uduality", "--model", "t3"])
        assert code == 0
        assert "check dim_u = 3" in text
        assert "check dim_stab_sp = 0" in text
        assert "check dim_iso_pr = 3" in text
        assert "check exactness_gap = 0" in text

    def test_lift(self):
        code, text = run(["lift", "--model", "identity-tau", "--killing", "dx"])
        assert code == 0
        assert "lift_residual" in text

    def test_lift_bad_spec_exit_2(self):
        code, _ = run(["lift", "--model", "identity-tau", "--killing", "bogus"])
        assert code == 2

    def test_pair_check_pass(self, a_translation):
        code, text = run(["pair-check", "--model", "identity-tau",
                          "--f", "translate:1.0", "--A", a_translation])
        assert code == 0
        assert "pair_residual" in text

    def test_pair_check_tolerance_failure_exit_1(self, a_translation):
        code, text = run(["pair-check", "--model", "identity-tau",
                          "--f", "translate:2.0", "--A", a_translation])
        assert code == 1
        assert "FAIL" in text

    def test_model_file_missing_exit_3(self):
        code, _ = run(["stabilizer", "--model", "no-such-model-or-file"])
        assert code == 3


class TestBundleCommands:
    def test_centralizer(self, bundle_file):
        code, text = run(["centralizer", "--bundle", bundle_file])
        assert code == 0
        assert "check dim_centralizer = 1" in text

    def test_centralizer_with_taming(self, bundle_file, tmp_path):
        j = tmp_path / "taming.txt"
        j.write_text("0 1\n-1 0\n")
        code, text = run(["centralizer", "--bundle", bundle_file,
                          "--taming", str(j)])
        assert code == 0
        assert "dim_autb_theta = 1" in text

    def test_invariants(self, bundle_file):
        code, text = run(["invariants", "--bundle", bundle_file, "--maxlen", "3"])
        assert code == 0
        assert "traces" in text

    def test_invariants_maxlen_guard_exit_2(self, bundle_file):
        code, _ = run(["invariants", "--bundle", bundle_file, "--maxlen", "9"])
        assert code == 2

    def test_missing_bundle_exit_3(self):
        code, _ = run(["centralizer", "--bundle", "/nonexistent/b.txt"])
        assert code == 3


class TestGridCommands:
    def test_selfdual(self, config_file):
        code, text = run(["selfdual", "--config", config_file])
        assert code == 0
        assert "selfdual_violation" in text

    def test_residuals(self, config_file):
        code, text = run(["residuals", "--config", config_file])
        assert code == 0
        assert "scalar_assembly_gap" in text

    def test_residuals_convergence_table(self, config_file):
        code, text = run(["residuals", "--config", config_file, "--refine", "1"])
        assert code == 0
        assert "refine[1] grid = 13x13x13x13" in text
        assert "refine[1] einstein_max" in text

    def test_transport(self, config_file, a_translation):
        code, text = run(["transport", "--config", config_file,
                          "--f", "translate:1.0", "--A", a_translation])
        assert code == 0
        assert "einstein_discrepancy" in text

    def test_missing_config_exit_3(self):
        code, _ = run(["residuals", "--config", "/nonexistent/x.cfg"])
        assert code == 3


class TestSpinorCommands:
    def test_spinor_check_minkowski(self):
        code, text = run(["spinor-check", "--frame", "minkowski", "--lambda", "0"])
        assert code == 0
        assert "parallel_residual" in text

    def test_spinor_check_unknown_frame_exit_2(self):
        code, _ = run(["spinor-check", "--frame", "rindler"])
        assert code == 2

    def test_thm53_ads(self):
        code, text = run(["thm53", "--frame", "ads4-poincare", "--lambda", "1.0"])
        assert code == 0
        assert "check nontrivial = true" in text
        assert "dkappa_max" in text


class TestDeterminism:
    def test_byte_identical_reports(self):
        _, t1 = run(["stabilizer", "--model", "axio-dilaton"])
        _, t2 = run(["stabilizer", "--model", "axio-dilaton"])
        assert t1 == t2

    def test_seed_recorded_from_env(self, monkeypatch):
        monkeypatch.setenv("EMDUALITY_SEED", "7")
        _, text = run(["models", "list"])
        assert "seed = 7" in text
