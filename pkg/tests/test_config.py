import pytest

from metasir.config import (
    DEFAULT_SYSTEM,
    ExperimentConfig,
    config_to_dict,
    db_to_linear,
    load_config,
    parse_config_items,
    parse_config_text,
)
from metasir.network import InterferenceModel
from metasir.scheduling import Scheme


class TestDefaults:
    def test_reference_scenario(self):
        assert DEFAULT_SYSTEM.lambda_p == 3e-6
        assert DEFAULT_SYSTEM.n_channels == 20
        assert DEFAULT_SYSTEM.m_mean == 60.0
        assert DEFAULT_SYSTEM.r_cluster == 40.0
        assert DEFAULT_SYSTEM.alpha == 4.0
        assert DEFAULT_SYSTEM.sim_radius == 3000.0
        assert DEFAULT_SYSTEM.rho == 1.0

    def test_config_defaults(self):
        config = ExperimentConfig()
        assert config.n_realizations == 100_000
        assert config.schemes == (Scheme.RRS, Scheme.CRS)
        assert config.interference_model is InterferenceModel.THINNED


class TestDbConversion:
    def test_known_points(self):
        assert db_to_linear(0.0) == 1.0
        assert db_to_linear(-5.0) == pytest.approx(10.0**-0.5)
        assert db_to_linear(10.0) == pytest.approx(10.0)


class TestParsing:
    def test_full_round_trip(self):
        text = """
        # scenario
        lambda_p = 1e-5
        n_channels = 10
        m_mean = 30
        r_cluster = 25
        alpha = 4
        sim_radius = 2000
        schemes = rrs
        theta_db = -5, 0, 5
        x = 0.9, 0.99
        n_realizations = 500
        interference_model = full
        master_seed = 42
        output_path = out.csv
        """
        config = parse_config_text(text)
        assert config.system.lambda_p == 1e-5
        assert config.system.n_channels == 10
        assert config.schemes == (Scheme.RRS,)
        assert config.theta_db == (-5.0, 0.0, 5.0)
        assert config.x == (0.9, 0.99)
        assert config.n_realizations == 500
        assert config.interference_model is InterferenceModel.FULL
        assert config.master_seed == 42
        assert config.output_path == "out.csv"

    def test_partial_override_keeps_defaults(self):
        config = parse_config_text("m_mean = 10\n")
        assert config.system.m_mean == 10.0
        assert config.system.lambda_p == DEFAULT_SYSTEM.lambda_p
        assert config.n_realizations == 100_000

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            parse_config_items("bogus = 3\n")

    def test_malformed_line_rejected(self):
        with pytest.raises(ValueError, match="expected"):
            parse_config_items("just words\n")

    def test_bad_scheme_rejected(self):
        with pytest.raises(ValueError, match="scheme"):
            parse_config_text("schemes = rrs, nope\n")

    def test_nonmonotone_grid_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            parse_config_text("theta_db = 5, 0\n")

    def test_load_config_round_trip(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("n_realizations = 77\nmaster_seed = 9\n", encoding="utf-8")
        config = load_config(str(path))
        assert config.n_realizations == 77
        assert config.master_seed == 9


class TestValidation:
    def test_empty_scheme_set_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(schemes=())

    def test_bad_x_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(x=(0.5, 1.5))

    def test_bad_seed_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(master_seed=-1)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(theta_db=())


class TestConfigToDict:
    def test_flat_view(self):
        d = config_to_dict(ExperimentConfig(theta_db=(0.0,), x=(0.9,)))
        assert d["lambda_p"] == 3e-6
        assert d["schemes"] == "rrs,crs"
        assert d["theta_db"] == [0.0]
        assert d["x"] == [0.9]
        assert d["interference_model"] == "thinned"
