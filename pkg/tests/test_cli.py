"""Command-line surface: init, chain inspection, account lookup, replay,
and exit codes."""
import json

import pytest

from chainreview.cli import main
from chainreview.config import NodeConfig
from chainreview.engine import ReviewEngine
from chainreview.workload import build_alpha_workload, format_workload


@pytest.fixture
def initialized(tmp_path, capsys):
    config_path = tmp_path / "node.json"
    data_dir = tmp_path / "data"
    code = main(["-c", str(config_path), "init", "--data-dir", str(data_dir)])
    capsys.readouterr()
    assert code == 0
    return config_path


def run(capsys, argv) -> tuple[int, str]:
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out + captured.err


def test_init_refuses_overwrite_without_force(initialized, capsys):
    code, out = run(capsys, ["-c", str(initialized), "init"])
    assert code == 1 and "refusing" in out


def test_chain_verify_reports_ok_and_height(initialized, capsys):
    code, out = run(capsys, ["-c", str(initialized), "chain", "verify"])
    assert code == 0
    assert "OK, height=1" in out


def test_chain_show_genesis(initialized, capsys):
    code, out = run(capsys, ["-c", str(initialized), "chain", "show", "0", "--json"])
    assert code == 0
    block = json.loads(out)
    assert block["index"] == 0
    assert block["prev_hash"] == "00" * 32


def test_account_show(initialized, capsys, tmp_path):
    config = NodeConfig.from_file(initialized)
    engine = ReviewEngine(config)
    creds = engine.register_user("alice", seed=bytes(31) + b"\x01")
    code, out = run(
        capsys, ["-c", str(initialized), "account", "show", creds.address.hex(), "--json"]
    )
    assert code == 0
    body = json.loads(out)
    assert body["name"] == "alice"
    assert body["balance"] == config.grant_amount - config.gas_default_fee


def test_replay_spec_file_counts(initialized, capsys, tmp_path):
    spec = build_alpha_workload(users=5, articles=2, comments=3, annotations=2,
                                groups=1, modifications=0)
    spec_path = tmp_path / "mini.spec"
    spec_path.write_text(format_workload(spec))
    code, out = run(capsys, ["-c", str(initialized), "replay", str(spec_path), "--json"])
    assert code == 0
    report = json.loads(out)
    assert report["counts"]["article"] == 2
    assert report["counts"]["comment"] == 3
    assert report["counts"]["annotation"] == 2
    assert report["chain_ok"] is True


def test_account_show_rejects_malformed_address(initialized, capsys):
    code, out = run(capsys, ["-c", str(initialized), "account", "show", "zz-not-hex"])
    assert code == 1 and "not a hex address" in out
    code, out = run(capsys, ["-c", str(initialized), "account", "show", "abcd"])
    assert code == 1 and "20 bytes" in out


def test_replay_missing_spec_file(initialized, capsys):
    code, out = run(capsys, ["-c", str(initialized), "replay", "/nowhere/missing.spec"])
    assert code == 1 and "no workload file" in out


def test_unknown_subcommand_usage_and_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["definitely-not-a-command"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_missing_command_prints_usage(capsys):
    code, out = run(capsys, [])
    assert code == 2 and "usage" in out


def test_missing_config_is_a_clean_error(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("BR_CONFIG", raising=False)
    code, out = run(capsys, ["-c", str(tmp_path / "absent.json"), "chain", "verify"])
    assert code == 1 and "no config file" in out


def test_env_var_config_resolution(initialized, capsys, monkeypatch):
    monkeypatch.setenv("BR_CONFIG", str(initialized))
    code, out = run(capsys, ["chain", "verify"])
    assert code == 0 and "OK" in out
