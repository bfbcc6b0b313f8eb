"""Command line behavior: exit codes, output routing, and reproducibility."""

import json

import pytest

from stratcomm.cli import build_parser, main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


CHANNEL_CONFIG = {"channel": {"matrix": [[0.9, 0.1], [0.1, 0.9]]}}
# indifferent decoder: optimistic commitment gives 0, pessimistic 1/2
GAME_CONFIG = {
    "game": {
        "enc_cost": [[0.0, 1.0], [1.0, 0.0]],
        "dec_cost": [[0.0, 0.0], [0.0, 0.0]],
    }
}


class TestParser:
    def test_all_subcommands_present(self):
        parser = build_parser()
        args = parser.parse_args(["capacity", "--format", "json", "--seed", "4"])
        assert args.command == "capacity"
        assert args.format == "json"
        assert args.seed == 4

    def test_command_is_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_bad_format_rejected(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["capacity", "--format", "xml"])


class TestExitCodes:
    def test_success_writes_csv_to_stdout(self, tmp_path, capsys):
        config = write_config(tmp_path, "c.json", CHANNEL_CONFIG)
        assert main(["capacity", "--config", config]) == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0] == "# tool: stratcomm"
        header = next(line for line in lines if not line.startswith("#"))
        assert header.startswith("capacity,")

    def test_missing_config_exits_2(self, capsys):
        assert main(["capacity", "--config", "/no/such/file.json"]) == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "config"
        assert "not found" in err["error"]["message"]

    def test_invalid_section_exits_2(self, tmp_path, capsys):
        config = write_config(tmp_path, "bad.json", {"nonsense": {}})
        assert main(["capacity", "--config", config]) == 2
        assert json.loads(capsys.readouterr().err)["error"]["type"] == "config"

    def test_runner_config_error_exits_2(self, tmp_path, capsys):
        # structurally valid config, but the command needs a channel section
        config = write_config(tmp_path, "game.json", GAME_CONFIG)
        assert main(["capacity", "--config", config]) == 2
        assert json.loads(capsys.readouterr().err)["error"]["type"] == "config"

    def test_unwritable_out_exits_1(self, tmp_path, capsys):
        config = write_config(tmp_path, "c.json", CHANNEL_CONFIG)
        target = str(tmp_path / "absent" / "out.csv")
        assert main(["capacity", "--config", config, "--out", target]) == 1
        assert json.loads(capsys.readouterr().err)["error"]["type"] == "runtime"

    def test_missing_seed_for_random_audit_exits_2(self, tmp_path, capsys):
        config = write_config(tmp_path, "audit.json", {"random_audit": {"n_instances": 2}})
        assert main(["audit-order", "--config", config]) == 2
        assert "seed" in json.loads(capsys.readouterr().err)["error"]["message"]


class TestOutputs:
    def test_json_document_shape(self, tmp_path):
        config = write_config(tmp_path, "c.json", CHANNEL_CONFIG)
        out = tmp_path / "cap.json"
        assert main(["capacity", "--config", config, "--out", str(out),
                     "--format", "json"]) == 0
        document = json.loads(out.read_text())
        assert set(document) == {"metadata", "columns", "rows"}
        meta = document["metadata"]
        assert meta["tool"] == "stratcomm"
        assert meta["command"] == "capacity"
        assert meta["seed"] == "none"
        assert len(meta["config_digest"]) == 64
        assert document["rows"][0]["capacity"] == pytest.approx(0.531, abs=1e-3)

    def test_counterexample_runs_without_config(self, capsys):
        assert main(["counterexample"]) == 0
        out = capsys.readouterr().out
        assert any(line.startswith("rse_value") for line in out.splitlines())

    def test_seed_flag_overrides_config_seed(self, tmp_path):
        payload = {"seed": 1, "random_audit": {"n_instances": 2, "max_alphabet": 2}}
        config = write_config(tmp_path, "audit.json", payload)
        flag_out = tmp_path / "flag.csv"
        cfg_out = tmp_path / "cfg.csv"
        assert main(["audit-order", "--config", config, "--seed", "2",
                     "--out", str(flag_out)]) == 0
        assert main(["audit-order", "--config", config, "--out", str(cfg_out)]) == 0
        flag_text = flag_out.read_text()
        assert "# seed: 2" in flag_text
        assert "# seed: 1" in cfg_out.read_text()
        assert flag_text != cfg_out.read_text()

    def test_identical_runs_are_byte_identical(self, tmp_path):
        payload = {"seed": 3, "random_audit": {"n_instances": 2, "max_alphabet": 2}}
        config = write_config(tmp_path, "audit.json", payload)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        for target in (first, second):
            assert main(["audit-order", "--config", config, "--out", str(target)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_game_commitment_commands(self, tmp_path, capsys):
        config = write_config(tmp_path, "game.json", GAME_CONFIG)
        for command, value in (("ose", "0"), ("rse", "0.5")):
            assert main([command, "--config", config]) == 0
            out = capsys.readouterr().out
            data_line = out.splitlines()[-1]
            assert data_line.startswith(f"{command},0,{value},")
