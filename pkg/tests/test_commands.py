import pytest

from uav_channel_gan.commands import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_OK,
    cli_dispatch,
)
from uav_channel_gan.reporting import read_table


@pytest.fixture
def run(config_dir):
    def _run(*args: str) -> int:
        return cli_dispatch([*args, f"--config_path={config_dir}", "logging.show_progress=false"])

    return _run


def test_completion_writes_curve(run, tmp_path):
    assert run("completion", f"--out={tmp_path}") == EXIT_OK
    header, rows = read_table(tmp_path / "completion_curve.csv")
    assert header["command"] == "completion"
    assert 16 <= header["T_G"] <= 22
    assert header["completion_time_s"] == pytest.approx(0.1 * header["T_G"])
    assert rows[3]["p_closed_form"] == pytest.approx(0.0405)
    assert rows[3]["p_oracle"] == pytest.approx(0.0405)
    assert rows[-1]["p_oracle"] is None


def test_formation_json(run, tmp_path):
    assert run("formation", f"--out={tmp_path}", "--format=json") == EXIT_OK
    meta, data = read_table(tmp_path / "formation.json")
    assert meta["num_edges"] == 4
    assert meta["strongly_connected"] is True
    assert [(e["src"], e["dst"]) for e in data["edges"]] == [(0, 1), (1, 2), (2, 3), (3, 0)]


def test_same_seed_gives_identical_files(run, tmp_path):
    for name in ("a", "b"):
        assert run("completion", f"--out={tmp_path / name}", "--seed=3") == EXIT_OK
    first = (tmp_path / "a" / "completion_curve.csv").read_bytes()
    assert first == (tmp_path / "b" / "completion_curve.csv").read_bytes()


def test_spread_sim(run, tmp_path):
    assert run("spread-sim", f"--out={tmp_path}", "--trials=2000") == EXIT_OK
    header, rows = read_table(tmp_path / "spread_curve.csv")
    assert header["trials"] == 2000
    assert rows[2]["p_monte_carlo"] == 0.0


def test_sweep_without_monte_carlo(run, tmp_path):
    code = run("sweep", "--axis=eta", "--nomonte_carlo", f"--out={tmp_path}")
    assert code == EXIT_OK
    _, rows = read_table(tmp_path / "sweep_eta.csv")
    assert [r["value"] for r in rows] == [0.25, 0.5, 0.75]
    assert all(r["p_monte_carlo"] is None for r in rows)


def test_unknown_flag_is_usage_error(run):
    assert run("completion", "--no_such_flag=1") == EXIT_CONFIG


def test_bad_override_is_config_error(run, tmp_path):
    assert run("completion", "topology.share_ratio=3", f"--out={tmp_path}") == EXIT_CONFIG


def test_infeasible_exit_status(run, tmp_path):
    assert run("formation", "topology.snr_threshold_db=200", f"--out={tmp_path}") == (
        EXIT_INFEASIBLE
    )


SMALL_TRAIN = ("channel.tx_elements=16", "channel.rx_elements=8", "scenario.dataset_size=200")


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_train_saves_datasets_and_reuses_them(run, tmp_path, fmt):
    first, second = tmp_path / "first", tmp_path / "second"
    args = ("train", *SMALL_TRAIN, "--rounds=2", f"--format={fmt}")
    assert run(*args, f"--out={first}") == EXIT_OK
    saved = first / f"datasets.{fmt}"
    assert saved.is_file()
    assert run(*args, f"--out={second}", f"--datasets_path={saved}") == EXIT_OK
    assert saved.read_bytes() == (second / f"datasets.{fmt}").read_bytes()
    _, collected = read_table(first / f"training_metrics.{fmt}")
    _, reused = read_table(second / f"training_metrics.{fmt}")
    assert collected == reused


def test_train_with_missing_datasets_is_config_error(run, tmp_path):
    code = run("train", *SMALL_TRAIN, f"--out={tmp_path}", f"--datasets_path={tmp_path / 'x.csv'}")
    assert code == EXIT_CONFIG
