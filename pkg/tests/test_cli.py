import json

import numpy as np
import pytest

from openmult.cli import main
from openmult.functions import FiniteSpaceFunction, GridFunction, IntervalDomain
from openmult.interval import delta0

DOM = IntervalDomain(0.0, 1.0, 129)
T = DOM.nodes()


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
    return str(path)


def interval_triple(tmp_path, d_scale):
    f = GridFunction(DOM, np.exp(2j * np.pi * T))
    g = GridFunction(DOM, np.full(DOM.n, 1.0 + 0j))
    rng = np.random.default_rng(0)
    raw = rng.standard_normal(DOM.n) + 1j * rng.standard_normal(DOM.n)
    if d_scale == 0:
        dv = np.zeros(DOM.n, dtype=complex)
    else:
        dv = raw * (d_scale / np.max(np.abs(raw)))
    d = GridFunction(DOM, dv)
    return write_json(tmp_path / "in.json", {"f": f.to_json(), "g": g.to_json(), "d": d.to_json()})


class TestFactorInterval:
    def test_zero_perturbation_exit_zero(self, tmp_path, capsys):
        path = interval_triple(tmp_path, 0)
        code = main(["factor-interval", "--input", path, "--epsilon", "0.7"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        d1 = out["result"]["d1"]["values"]
        assert all(v == [0.0, 0.0] for v in d1)

    def test_oversized_perturbation_exit_two(self, tmp_path, capsys):
        path = interval_triple(tmp_path, 2 * delta0(0.7))
        code = main(["factor-interval", "--input", path, "--epsilon", "0.7"])
        assert code == 2
        err = capsys.readouterr().err.strip().splitlines()[-1]
        diag = json.loads(err)
        assert diag["error"] == "PerturbationTooLarge"
        assert diag["bound"] == "delta0"

    def test_report_embeds_constants(self, tmp_path, capsys):
        path = interval_triple(tmp_path, delta0(0.7))
        code = main(["factor-interval", "--input", path, "--epsilon", "0.7"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        consts = out["constants"]
        assert float(consts["delta0"]) == pytest.approx(delta0(0.7))
        assert float(consts["epsilon1"]) == pytest.approx(0.1)

    def test_csv_output(self, tmp_path):
        path = interval_triple(tmp_path, delta0(0.7))
        out_csv = tmp_path / "out.csv"
        code = main([
            "factor-interval", "--input", path, "--epsilon", "0.7",
            "--format", "csv", "--output", str(out_csv),
        ])
        assert code == 0
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == "t,d1_re,d1_im,d2_re,d2_im"
        assert len(lines) == DOM.n + 1

    def test_grid_refinement_flag(self, tmp_path, capsys):
        path = interval_triple(tmp_path, delta0(0.7))
        code = main(["factor-interval", "--input", path, "--epsilon", "0.7", "--grid", "257"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["result"]["d1"]["domain"]["n"] == 257

    def test_idempotent_reports(self, tmp_path):
        path = interval_triple(tmp_path, delta0(0.7))
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert main(["factor-interval", "--input", path, "--epsilon", "0.7", "--seed", "5", "--output", str(out1)]) == 0
        assert main(["factor-interval", "--input", path, "--epsilon", "0.7", "--seed", "5", "--output", str(out2)]) == 0
        a = json.loads(out1.read_text())
        b = json.loads(out2.read_text())
        a.pop("timestamp"), b.pop("timestamp")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


class TestFactorGraph:
    def test_theta_graph(self, tmp_path, capsys):
        n = 65
        t = np.linspace(0, 1, n)
        edges = [{"u": "u", "v": "v", "a": 0.0, "b": 1.0, "n": n} for _ in range(2)]
        dom_obj = {"type": "graph", "vertices": ["u", "v"], "edges": edges}
        fe = np.exp(1j * np.pi * t)
        ge = 0.8 * np.exp(-1j * np.pi * t)
        rng = np.random.default_rng(1)
        de = t * (1 - t) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        de = de * (delta0(0.7) / np.max(np.abs(de)))

        def vals(arr):
            return [[float(v.real), float(v.imag)] for v in arr]

        payload = {
            "f": {"domain": dom_obj, "values": [vals(fe), vals(fe)]},
            "g": {"domain": dom_obj, "values": [vals(ge), vals(ge)]},
            "d": {"domain": dom_obj, "values": [vals(de), vals(de * 0.5)]},
        }
        path = write_json(tmp_path / "graph.json", payload)
        code = main(["factor-graph", "--input", path, "--epsilon", "0.7"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["result"]["edges"]) == 2
        assert float(out["result"]["residual"]) < 1e-9 * 10


class TestFactorFinite:
    def test_basic(self, tmp_path, capsys):
        a = FiniteSpaceFunction([2.0, 0.0, 1j])
        b = FiniteSpaceFunction([3.0, 0.0, -1j])
        d = FiniteSpaceFunction([0.05, 0.06, 0.05j])
        path = write_json(tmp_path / "fin.json", {"a": a.to_json(), "b": b.to_json(), "d": d.to_json()})
        code = main(["factor-finite", "--input", path, "--epsilon", "0.5"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert float(out["bound_a"]) <= 0.5
        assert float(out["bound_b"]) <= 0.5


class TestScheme:
    def _payload(self, tmp_path, n=64):
        t = np.linspace(0, 1, n)
        F = FiniteSpaceFunction(1.2 + 0.5 * np.exp(2j * np.pi * t))
        G = FiniteSpaceFunction(np.exp(-2j * np.pi * t))
        # H sized against the known constants for this pair
        from openmult import scheme_params, sup_algebra_model

        p = scheme_params(F, G, 0.5, sup_algebra_model(n))
        rng = np.random.default_rng(2)
        raw = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        H = FiniteSpaceFunction(raw / np.max(np.abs(raw)) * 0.99 * p.delta)
        return write_json(
            tmp_path / "scheme.json",
            {"model": {"type": "sup"}, "F": F.to_json(), "G": G.to_json(), "H": H.to_json()},
        )

    def test_trace_written_with_claims(self, tmp_path):
        path = self._payload(tmp_path)
        out = tmp_path / "report.json"
        code = main(["scheme", "--input", path, "--epsilon", "0.5", "--audit", "--output", str(out)])
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["claims_pass"] is True
        assert rep["audit"]["pass"] is True
        assert len(rep["trace"]) == rep["iterations"]
        for key in ("gamma", "K", "That", "T", "delta"):
            assert key in rep["constants"]

    def test_unsupported_model_refused(self, tmp_path, capsys):
        path = self._payload(tmp_path)
        data = json.loads(open(path).read())
        data["model"] = {"type": "group"}
        path2 = write_json(tmp_path / "bad.json", data)
        code = main(["scheme", "--input", path2, "--epsilon", "0.5"])
        assert code == 2
        diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert "not desk-verifiable" in diag["message"]

    def test_unknown_model_refused(self, tmp_path, capsys):
        path = self._payload(tmp_path)
        data = json.loads(open(path).read())
        data["model"] = {"type": "mystery"}
        path2 = write_json(tmp_path / "bad2.json", data)
        code = main(["scheme", "--input", path2, "--epsilon", "0.5"])
        assert code == 2


class TestBundledFixtures:
    from pathlib import Path

    FIXTURES = str(Path(__file__).resolve().parent.parent / "fixtures")

    def test_scheme_fixture(self, tmp_path):
        out = tmp_path / "report.json"
        code = main([
            "scheme", "--input", f"{self.FIXTURES}/scheme_64.json",
            "--epsilon", "0.5", "--audit", "--output", str(out),
        ])
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["claims_pass"] is True
        assert rep["audit"]["pass"] is True

    def test_interval_fixture(self, tmp_path):
        out = tmp_path / "report.json"
        code = main([
            "factor-interval", "--input", f"{self.FIXTURES}/interval_joint_zero.json",
            "--epsilon", "0.7", "--output", str(out),
        ])
        assert code == 0
        rep = json.loads(out.read_text())
        assert float(rep["result"]["residual"]) <= 1e-9 * 10

    def test_graph_fixture(self, tmp_path):
        out = tmp_path / "report.json"
        code = main([
            "factor-graph", "--input", f"{self.FIXTURES}/theta_graph.json",
            "--epsilon", "0.7", "--output", str(out),
        ])
        assert code == 0
        rep = json.loads(out.read_text())
        assert float(rep["result"]["residual"]) <= 1e-9 * 10


class TestProbeCommand:
    def test_probe_csv(self, tmp_path):
        f = GridFunction.constant(IntervalDomain(0.0, 1.0, 65), 1.0)
        payload = {"f": f.to_json(), "g": f.to_json(), "trials": 2}
        path = write_json(tmp_path / "probe.json", payload)
        out = tmp_path / "curve.csv"
        code = main([
            "probe", "--input", path, "--epsilon", "0.5", "--seed", "3",
            "--format", "csv", "--output", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "r,success_rate"


class TestNondegApproxCommand:
    def test_basic(self, tmp_path, capsys):
        f = FiniteSpaceFunction([1.0, 0.0])
        g = FiniteSpaceFunction([0.0, 0.0])
        path = write_json(tmp_path / "nd.json", {"f": f.to_json(), "g": g.to_json()})
        code = main(["nondeg-approx", "--input", path, "--epsilon", "0.6"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert float(out["min_joint_modulus_sq"]) > 0


class TestArgumentHandling:
    def test_unknown_command_exit_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["factor-ultrapower", "--input", "x", "--epsilon", "0.5"])
        assert exc.value.code == 2

    def test_epsilon_out_of_range(self, tmp_path, capsys):
        path = interval_triple(tmp_path, 0)
        code = main(["factor-interval", "--input", path, "--epsilon", "1.5"])
        assert code == 2

    def test_internal_failure_exit_one(self, tmp_path, capsys, monkeypatch):
        import openmult.cli as cli_mod

        def boom(*args, **kwargs):
            raise RuntimeError("internal invariant failed: injected")

        monkeypatch.setattr(cli_mod, "open_mult_interval", boom)
        path = interval_triple(tmp_path, delta0(0.7))
        code = main(["factor-interval", "--input", path, "--epsilon", "0.7"])
        assert code == 1
        diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert diag["error"] == "RuntimeError"


class TestDiagonalSchemeCommand:
    def test_diagonal_model_roundtrip(self, tmp_path, capsys):
        from openmult import DiagonalAlgebraElement, diagonal_algebra_model, scheme_params

        w = [1.0, 1.0]
        a = DiagonalAlgebraElement(1.0, np.array([0.1, -0.05j]), np.array(w))
        b = DiagonalAlgebraElement(0.9, np.array([0.02j, 0.1]), np.array(w))
        p = scheme_params(a, b, 0.5, diagonal_algebra_model(np.array(w)))
        h = DiagonalAlgebraElement(0.5 * p.delta, np.array([0.1 * p.delta, 0j]), np.array(w))
        payload = {
            "model": {"type": "diagonal", "weights": w, "unital": True},
            "F": a.to_json(),
            "G": b.to_json(),
            "H": h.to_json(),
        }
        path = write_json(tmp_path / "diag.json", payload)
        code = main(["scheme", "--input", path, "--epsilon", "0.5"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["claims_pass"] is True

    def test_non_unital_refused(self, tmp_path, capsys):
        payload = {
            "model": {"type": "diagonal", "weights": [1.0], "unital": False},
            "F": {"scalar": [1.0, 0.0], "coords": [[0.0, 0.0]]},
            "G": {"scalar": [1.0, 0.0], "coords": [[0.0, 0.0]]},
            "H": {"scalar": [0.0, 0.0], "coords": [[0.0, 0.0]]},
        }
        path = write_json(tmp_path / "nu.json", payload)
        code = main(["scheme", "--input", path, "--epsilon", "0.5"])
        assert code == 2
