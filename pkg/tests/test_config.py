import pytest

from bcsim.config import (ConfigError, SimConfig, load_config_file,
                          parse_config_text, validate_config)


def test_empty_input_yields_standard_defaults():
    cfg = validate_config({})
    assert (cfg.lat_lookup, cfg.lat_ras, cfg.lat_cas, cfg.lat_pre) == (1, 28, 11, 11)
    assert (cfg.sc_sets, cfg.sc_ways, cfg.vc_lines, cfg.vc_sectors_per_line) == \
        (256, 4, 64, 16)
    assert (cfg.wc_sets, cfg.wc_ways, cfg.wb_capacity) == (512, 4, 8)
    assert (cfg.drain_threshold_sc, cfg.drain_threshold_vc) == (8, 5)
    assert cfg.sc_bytes == cfg.vc_bytes == 64 * 1024
    assert cfg.wc_bytes == 128 * 1024


def test_capacity_mismatch_listed():
    with pytest.raises(ConfigError) as exc:
        validate_config({"sc_sets": 128})
    assert any("64" in p or "match" in p for p in exc.value.problems)


def test_vl_bits_domain():
    with pytest.raises(ConfigError):
        validate_config({"vl_bits": 384})
    for vl in (128, 256, 512, 1024, 2048, 4096):
        assert validate_config({"vl_bits": vl}).vl_bits == vl


def test_every_violation_is_reported():
    with pytest.raises(ConfigError) as exc:
        validate_config({"vl_bits": 384, "hierarchy": "split", "prefetch": "maybe"})
    assert len(exc.value.problems) == 3


def test_unknown_key_is_an_error():
    with pytest.raises(ConfigError) as exc:
        validate_config({"sector_size": 64})
    assert "unknown key" in exc.value.problems[0]


def test_zero_sized_structures_rejected():
    with pytest.raises(ConfigError):
        validate_config({"vc_lines": 0})


def test_vc_threshold_default_derivation():
    cfg = validate_config({"wb_capacity": 6, "drain_threshold_vc": None,
                           "drain_threshold_sc": 6})
    assert cfg.drain_threshold_vc == 6 // 2 + 1


def test_threshold_must_fit_capacity():
    with pytest.raises(ConfigError):
        validate_config({"wb_capacity": 4, "drain_threshold_sc": 4})  # vc thr 5 > 4


def test_parse_config_text():
    text = """
    # a comment
    vl_bits = 1024
    prefetch = ideal   # trailing comment
    fetch_on_full_write = true
    """
    cfg = validate_config(parse_config_text(text))
    assert cfg.vl_bits == 1024 and cfg.prefetch == "ideal"
    assert cfg.fetch_on_full_write is True


def test_parse_rejects_duplicates_and_garbage():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("vl_bits = 128\nvl_bits = 256\nnonsense line\n")
    assert len(exc.value.problems) == 2
    assert "duplicate" in exc.value.problems[0]


def test_load_config_file(tmp_path):
    path = tmp_path / "sim.cfg"
    path.write_text("vl_bits = 2048\nhierarchy = white\n")
    cfg = load_config_file(path)
    assert cfg.vl_bits == 2048 and cfg.hierarchy == "white"


def test_bus_transfer_cycles_derived():
    assert validate_config({}).bus_transfer_cycles == 1
    assert validate_config({"bus_bits": 256}).bus_transfer_cycles == 2


def test_config_is_frozen():
    cfg = validate_config({})
    with pytest.raises(Exception):
        cfg.vl_bits = 128
    assert isinstance(cfg, SimConfig)
