import json

from kdomset.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGenRun:
    def test_gen_then_run_path4(self, tmp_path, capsys):
        graph_file = tmp_path / "p4.g"
        code, out, err = run_cli(
            ["gen", "--type", "path", "--n", "4", "--out", str(graph_file)], capsys)
        assert code == 0
        assert graph_file.read_text().splitlines()[0] == "4 3"

        report_file = tmp_path / "report.json"
        code, out, err = run_cli(
            ["run", "--graph", str(graph_file), "--k", "1", "--mode", "sim",
             "--out", str(report_file)], capsys)
        assert code == 0
        doc = json.loads(report_file.read_text())
        assert doc["dominating_set"] == [0, 2]
        assert doc["verification"]["ok"] is True
        assert doc["metrics"]["messages"] > 0

    def test_run_with_generator_spec(self, capsys):
        code, out, err = run_cli(
            ["run", "--gen", "gnm-connected:n=20,m=30", "--seed", "5",
             "--k", "2"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["verification"]["dominates"] is True

    def test_literal_star_flags_domination_failure(self, tmp_path, capsys):
        graph_file = tmp_path / "star5.g"
        run_cli(["gen", "--type", "star", "--n", "5", "--out", str(graph_file)],
                capsys)
        code, out, err = run_cli(
            ["run", "--graph", str(graph_file), "--k", "3",
             "--policy", "literal"], capsys)
        assert code == 1
        assert "domination failed" in err
        doc = json.loads(out)
        assert doc["dominating_set"] == []

    def test_check_mode(self, capsys):
        code, out, err = run_cli(
            ["run", "--gen", "cycle:n=12", "--k", "2", "--mode", "sim",
             "--check"], capsys)
        assert code == 0
        assert json.loads(out)["verification"]["equivalence"] is True

    def test_byte_identical_reruns(self, capsys):
        argv = ["run", "--gen", "gnm-connected:n=25,m=40", "--seed", "3",
                "--k", "3", "--mode", "sim"]
        _, out1, _ = run_cli(argv, capsys)
        _, out2, _ = run_cli(argv, capsys)
        assert out1 == out2

    def test_trace_files(self, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        code, _, _ = run_cli(
            ["run", "--gen", "path:n=4", "--k", "1", "--mode", "sim",
             "--trace", str(trace), "--out", str(tmp_path / "r.json")], capsys)
        assert code == 0
        lines = trace.read_text().splitlines()
        assert lines and all("pulse" in json.loads(line) for line in lines)

    def test_usage_errors_exit_2(self, tmp_path, capsys):
        code, _, err = run_cli(["run", "--gen", "path:n=4", "--k", "9"], capsys)
        assert code == 2 and "k must satisfy" in err
        disconnected = tmp_path / "d.g"
        disconnected.write_text("4 2\n0 1\n2 3\n")
        code, _, err = run_cli(
            ["run", "--graph", str(disconnected), "--k", "1"], capsys)
        assert code == 2 and "disconnected" in err
        code, _, err = run_cli(["run", "--gen", "blob:n=4", "--k", "1"], capsys)
        assert code == 2


class TestVerifyOracleCompare:
    def test_verify_subcommand(self, tmp_path, capsys):
        dom = tmp_path / "dom.json"
        dom.write_text("[1, 3]")
        code, out, _ = run_cli(
            ["verify", "--gen", "path:n=5", "--k", "1", "--dom", str(dom)], capsys)
        assert code == 0
        assert json.loads(out)["dominates"] is True
        dom.write_text("[4]")
        code, out, _ = run_cli(
            ["verify", "--gen", "path:n=5", "--k", "1", "--dom", str(dom)], capsys)
        assert code == 1

    def test_oracle_subcommand(self, capsys):
        code, out, _ = run_cli(["oracle", "--gen", "cycle:n=6", "--k", "1"], capsys)
        assert code == 0
        assert json.loads(out)["optimal_size"] == 2

    def test_oracle_cap(self, capsys):
        code, _, err = run_cli(["oracle", "--gen", "path:n=30", "--k", "1"], capsys)
        assert code == 2

    def test_compare_equal(self, capsys):
        code, out, _ = run_cli(
            ["compare", "--gen", "gnm-connected:n=30,m=50", "--seed", "7",
             "--k", "3"], capsys)
        assert code == 0
        assert json.loads(out)["equal"] is True


class TestBench:
    def test_bench_writes_csv(self, tmp_path, capsys):
        # full corpus sweeps live in the acceptance suite; here sanity-check
        # the CSV shape on the large tier, which is small in instance count
        out = tmp_path / "bench.csv"
        code, _, _ = run_cli(["bench", "--tier", "large", "--out", str(out)], capsys)
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("name,kind,n,m,k,seed,policy,size")
        assert len(lines) == 1 + 21
