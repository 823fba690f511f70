import json
import math

import numpy as np
import pytest

from convexval.affine import AffineMax
from convexval.embed import build_vlt, compose_gk
from convexval.errors import InputError
from convexval.grid import GridFn
from convexval.profiles import INF, PLProfile
from convexval.serialization import (
    affine_max_from_dict,
    affine_max_to_dict,
    grid_from_csv,
    grid_to_csv,
    load_function,
    load_zeta,
    profile_from_dict,
    profile_to_dict,
    zeta_from_dict,
    zeta_to_dict,
)
from convexval.zetas import ScalarZeta


class TestProfileRoundtrip:
    def test_eager(self):
        p = PLProfile(0.5, [(0.0, 1.0), (1.0, 2.5)], domain_bound=3.0)
        q = profile_from_dict(profile_to_dict(p))
        assert q.equals(p, horizon=3.0)
        assert q.domain_bound == 3.0

    def test_unbounded_domain(self):
        p = PLProfile(0.0, [(0.0, 1.0)])
        d = profile_to_dict(p)
        assert d["domain_bound"] == "inf"
        assert profile_from_dict(d).domain_bound == INF

    def test_factorial_tail(self):
        inner = PLProfile(0.0, [(0.0, 1.0)])
        p = compose_gk(2, inner)
        d = profile_to_dict(inner, tail={"rule": "factorial", "k": 2})
        q = profile_from_dict(d)
        for r in (0.0, 2.0, 7.0, 30.0):
            assert q.eval(r) == pytest.approx(p.eval(r))

    def test_vlt_tail(self):
        p = build_vlt(1.0, 3)
        d = {
            "schema": 1,
            "kind": "radial_pl",
            "base": 0.0,
            "segments": [],
            "tail": {"rule": "vlt", "t": 1.0, "l": 3},
            "domain_bound": "inf",
        }
        q = profile_from_dict(d)
        for r in (0.0, 0.5, 1.0, 2.0):
            assert q.eval(r) == pytest.approx(p.eval(r))

    def test_lazy_without_tail_rejected(self):
        p = compose_gk(1, PLProfile(0.0, [(0.0, 1.0)]))
        with pytest.raises(InputError):
            profile_to_dict(p)

    def test_wrong_kind_rejected(self):
        with pytest.raises(InputError):
            profile_from_dict({"kind": "scalar_zeta"})


class TestZetaRoundtrip:
    @pytest.mark.parametrize(
        "z",
        [
            ScalarZeta.hat(2.0, 3.0),
            ScalarZeta.exp_decay(1.5, 0.7),
            ScalarZeta.harmonic(2.0),
            ScalarZeta.identity_like(),
        ],
    )
    def test_roundtrip(self, z):
        assert zeta_from_dict(zeta_to_dict(z)) == z

    def test_unknown_tail_rejected(self):
        with pytest.raises(InputError):
            zeta_from_dict({"kind": "scalar_zeta", "knots": [[0, 0]], "tail": {"kind": "bogus"}})


class TestAffineMaxRoundtrip:
    def test_roundtrip(self):
        u = AffineMax.make([((1.0, 0.5), -1.0), ((-1.0, 0.0), 2.0)], 2)
        v = affine_max_from_dict(affine_max_to_dict(u))
        assert v.pieces == u.pieces and v.n == 2


class TestGridRoundtrip:
    def test_2d_with_sentinels(self):
        vals = np.array([[0.0, 1.0], [np.inf, 2.0], [3.0, 4.0]])
        g = GridFn((0.0, 0.0), (2.0, 1.0), vals)
        h = grid_from_csv(grid_to_csv(g))
        assert h.lo == g.lo and h.hi == g.hi
        assert np.array_equal(h.values, g.values)
        assert math.isinf(h.values[1, 0])

    def test_1d(self):
        g = GridFn((0.0,), (1.0,), np.array([0.0, 0.5, 1.0]))
        h = grid_from_csv(grid_to_csv(g))
        assert np.array_equal(h.values, g.values)

    def test_shape_mismatch_rejected(self):
        text = json.dumps({"kind": "grid", "box": {"lo": [0, 0], "hi": [1, 1]}, "resolution": [3, 3]})
        text += "\n0,1\n2,3\n"
        with pytest.raises(InputError):
            grid_from_csv(text)

    def test_bad_header_rejected(self):
        with pytest.raises(InputError):
            grid_from_csv("not json\n1,2\n")


class TestFileHelpers:
    def test_load_function_sniffing(self, tmp_path):
        p = PLProfile(0.0, [(0.0, 1.0)], domain_bound=2.0)
        fp = tmp_path / "p.json"
        fp.write_text(json.dumps(profile_to_dict(p)))
        q = load_function(str(fp))
        assert isinstance(q, PLProfile)

        g = GridFn((0.0,), (1.0,), np.array([0.0, 1.0]))
        fg = tmp_path / "g.csv"
        fg.write_text(grid_to_csv(g))
        assert isinstance(load_function(str(fg)), GridFn)

        u = AffineMax.make([((1.0,), 0.0), ((-1.0,), 0.0)], 1)
        fa = tmp_path / "u.json"
        fa.write_text(json.dumps(affine_max_to_dict(u)))
        assert isinstance(load_function(str(fa)), AffineMax)

    def test_load_function_error_reports_line(self, tmp_path):
        fp = tmp_path / "bad.json"
        fp.write_text('{"kind": "radial_pl",\n  "base": }')
        with pytest.raises(InputError, match="line 2"):
            load_function(str(fp))

    def test_load_zeta(self, tmp_path):
        z = ScalarZeta.hat(1.0, 1.0)
        fp = tmp_path / "z.json"
        fp.write_text(json.dumps(zeta_to_dict(z)))
        assert load_zeta(str(fp)) == z
