"""Suite orchestration: every identity check as a named, reportable row.

A report is deterministic for a given configuration: rows are sorted by
check id, rationals are serialized exactly, and no timing or environment
data enters the artifact (timing goes to the log).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import dualgeom as dg
from . import highergenus as hg
from . import kahler as kh
from . import meanfield as mf
from . import mirror
from . import smallphase as sp
from .errors import ConfigError
from .rat import parse_rat, rat, rat_str
from .series import Series, compare_to_depth
from .symexpr import commutator, mat_eq, mat_is_zero, mat_mul

DEFAULT_NUS = ("1/3", "-2/5", "5/7")
SUITES = ("mirror", "smallphase", "meanfield", "npoint", "hierarchy",
          "dualgeom", "kahler")


@dataclass(frozen=True)
class RunConfig:
    dt: int = 5
    ndesc: int = 4
    dq: int = 5
    kz: int = 8
    gmax: int = 2
    seed: int = 20240801
    pad: int = 3
    nus: tuple[str, ...] = DEFAULT_NUS

    def validate(self) -> "RunConfig":
        for name in ("dt", "ndesc", "dq", "kz", "gmax", "pad"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.dq < 1:
            raise ConfigError("dq must be >= 1")
        if self.kz < self.dt + 3:
            raise ConfigError("kz must be at least dt + 3")
        for nu in self.nus:
            q = parse_rat(nu)
            from .rat import denom
            if denom(q) == 1:
                raise ConfigError(f"nu sample {nu} is an integer (resonant)")
        return self

    def echo(self) -> dict:
        return {"dt": self.dt, "ndesc": self.ndesc, "dq": self.dq,
                "kz": self.kz, "gmax": self.gmax, "seed": self.seed,
                "pad": self.pad, "nus": list(self.nus)}


@dataclass
class CheckRow:
    check_id: str
    description: str
    passed: bool
    depth: int | None = None
    first_failure: dict | None = None

    def as_dict(self) -> dict:
        out = {"id": self.check_id, "description": self.description,
               "status": "pass" if self.passed else "fail"}
        if self.depth is not None:
            out["verified_depth"] = self.depth
        if self.first_failure is not None:
            out["first_failure"] = self.first_failure
        return out


def _row(check_id: str, desc: str, ok: bool, depth=None, fail=None) -> CheckRow:
    return CheckRow(check_id, desc, bool(ok), depth, fail)


def _fail_info(diff) -> dict | None:
    if diff is None:
        return None
    expmap, ca, cb = diff
    return {"monomial": expmap, "lhs": rat_str(ca), "rhs": rat_str(cb)}


class Engine:
    """Caches the expensive shared objects for one configuration."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg.validate()
        self._cache: dict[str, object] = {}

    def basis(self):
        if "basis" not in self._cache:
            self._cache["basis"] = mirror.pf_solve(self.cfg.dq)
        return self._cache["basis"]

    def mirror_map(self):
        if "mm" not in self._cache:
            self._cache["mm"] = mirror.mirror_map(self.basis())
        return self._cache["mm"]

    def f0_potential(self):
        if "f0" not in self._cache:
            self._cache["f0"] = mirror.genus0_potential(self.basis(),
                                                        self.mirror_map())
        return self._cache["f0"]

    def chart(self) -> mf.CouplingChart:
        if "chart" not in self._cache:
            self._cache["chart"] = mf.CouplingChart.build(
                dt=self.cfg.dt, ndesc=self.cfg.ndesc, dq=self.cfg.dq,
                gmax=self.cfg.gmax, pad=self.cfg.pad)
        return self._cache["chart"]

    def order_params(self) -> mf.OrderParams:
        if "op" not in self._cache:
            self._cache["op"] = mf.solve_order_params(self.chart(),
                                                      self.f0_potential())
        return self._cache["op"]

    def free_energy0(self) -> Series:
        if "F0" not in self._cache:
            self._cache["F0"] = mf.free_energy0(self.order_params())
        return self._cache["F0"]

    def genus_data(self, seed: int) -> hg.GenusData:
        key = f"gd{seed}"
        if key not in self._cache:
            self._cache[key] = hg.GenusData.build(self.order_params(), seed)
        return self._cache[key]

    def free_energy(self, g: int) -> Series:
        if g == 0:
            return self.free_energy0()
        return self.genus_data(self.cfg.seed).free_energy(g)


# -- suites ----------------------------------------------------------------------


def suite_mirror(eng: Engine) -> list[CheckRow]:
    rows = []
    basis = eng.basis()
    for k, w in enumerate(basis.omegas):
        rows.append(_row(f"mirror.ode.w{k}",
                         "period basis element annihilated by the operator",
                         mirror.pf_operator(w).is_zero()))
    mm = eng.mirror_map()
    rows.append(_row("mirror.map.roundtrip",
                     "inverse series of the flat coordinate round-trips",
                     mm.roundtrip_ok()))
    pot = eng.f0_potential()
    want = {1: rat(2875), 2: rat(4876875, 8), 3: rat(8564575000, 27)}
    for d, val in want.items():
        if d <= eng.cfg.dq:
            rows.append(_row(f"mirror.count.N{d}",
                             f"degree-{d} rational-curve count",
                             pot.a[d] == val))
    n, integral = mirror.multiple_cover_invert(pot.a)
    rows.append(_row("mirror.covers.integral",
                     "reduced counts are integers through the cap", integral))
    nwant = {1: 2875, 2: 609250, 3: 317206375}
    for d, val in nwant.items():
        if d <= eng.cfg.dq:
            rows.append(_row(f"mirror.covers.n{d}",
                             f"reduced degree-{d} count", n[d] == rat(val)))
    return rows


def suite_smallphase(eng: Engine) -> list[CheckRow]:
    rows = []
    ch = sp.SmallChart.build()
    deg = eng.cfg.dt
    win = deg + 3
    eta = [[sp.eta_entry(i, j) for j in range(4)] for i in range(4)]
    sym = all(eta[i][j] == eta[j][i] for i in range(4) for j in range(4))
    selfinv = all(
        sum(eta[i][k] * eta[k][j] for k in range(4)) == (1 if i == j else 0)
        for i in range(4) for j in range(4))
    rows.append(_row("smallphase.metric.selfinverse",
                     "constant pairing is symmetric and self-inverse",
                     sym and selfinv))
    pot = eng.f0_potential()
    stable = sp.mirror_series_chart(eng.cfg.dt, eng.cfg.dq)
    cq = sp.quantum_product(ch, 1)
    f3 = sp.substitute_potential(ch, cq[1][2], stable, pot)
    ok3 = f3.coeff({}) == rat(5) and all(
        f3.coeff({"q": d}) == rat(d) ** 3 * pot.a[d]
        for d in range(1, eng.cfg.dq + 1))
    euler_sub = sp.substitute_potential(ch, sp.euler_residual(ch), stable, pot)
    rows.append(_row("smallphase.expansion.mode",
                     "identities specialize under the concrete potential",
                     ok3 and euler_sub.is_zero()))
    rows.append(_row("smallphase.euler",
                     "scaling field annihilates the energy",
                     sp.euler_residual(ch).is_zero()))
    rows.append(_row("smallphase.hessian",
                     "second-derivative matrix matches its closed form",
                     mat_eq(sp.hessian_small(ch), sp.expected_hessian(ch))))
    cps = [sp.quantum_product(ch, i) for i in range(4)]
    ident = [[ch.table.one() if i == j else ch.table.zero() for j in range(4)]
             for i in range(4)]
    rows.append(_row("smallphase.product.unit",
                     "first coordinate field is a product unit",
                     mat_eq(cps[0], ident)))
    commute = all(mat_is_zero(commutator(cps[i], cps[j]))
                  for i in range(4) for j in range(i + 1, 4))
    rows.append(_row("smallphase.product.commute",
                     "multiplication matrices pairwise commute", commute))
    rows.append(_row("smallphase.product.nilpotent",
                     "top-degree multiplication squares to zero",
                     mat_is_zero(mat_mul(cps[3], cps[3]))))
    fails = sp.wdvv_check(ch)
    rows.append(_row("smallphase.wdvv",
                     "all 256 associativity components hold symbolically",
                     len(fails) == 0,
                     fail={"components": fails[:3]} if fails else None))
    qf = sp.qde_check(ch, win, deg)
    rows.append(_row("smallphase.qde",
                     "z-derivatives of the pairing columns match the products",
                     len(qf) == 0, depth=deg - 1))
    of = sp.orthogonality_check(ch, win, deg)
    rows.append(_row("smallphase.orthogonality",
                     "pairing at opposite z arguments contracts to the metric",
                     len(of) == 0, depth=deg))
    rows.append(_row("smallphase.twopoint.symmetry",
                     "two-slot pairing symmetric under slot exchange",
                     sp.two_point_symmetry_check(ch, win, deg)))
    pf = sp.two_point_pairing_check(ch, win, deg)
    rows.append(_row("smallphase.twopoint.pairing",
                     "slot-sum times the two-point object rebuilds the pairing",
                     len(pf) == 0, depth=deg))
    rows.append(_row("smallphase.deformed.columns",
                     "deformed coordinates differentiate to the pairing columns",
                     sp.deformed_coordinates_match_s_columns(ch, win, deg),
                     depth=deg - 1))
    return rows


def suite_meanfield(eng: Engine) -> list[CheckRow]:
    rows = []
    cfg = eng.cfg
    ch = eng.chart()
    op = eng.order_params()
    rows.append(_row("meanfield.us.lagrange",
                     "inversion-sum route to the first order parameter",
                     mf.lagrange_u_s(ch) == op.u_S))
    rows.append(_row("meanfield.us.partition",
                     "partition-sum route to the first order parameter",
                     mf.partition_sum_u_s(ch) == op.u_S))
    rows.append(_row("meanfield.ur.lagrange",
                     "inversion-sum route to the second order parameter",
                     mf.lagrange_u_r(ch) == op.u_R))
    rows.append(_row("meanfield.ur.shiftop",
                     "index-shift operator sends u_S to u_R",
                     mf.d_operator(ch, op.u_S) == op.u_R))
    ok_jet = True
    for n in range(cfg.ndesc + 1):
        lhs = op.u_S.derive(f"t{n}P")
        rhs = op.u_S1 * op.us_pow(n).scale(rat(1, mirror.factorial(n)))
        eq, _, _ = compare_to_depth(lhs, rhs, cfg.dt)
        ok_jet = ok_jet and eq
    rows.append(_row("meanfield.us.flowjets",
                     "descendant derivatives of u_S take jet closed form",
                     ok_jet, depth=cfg.dt - 1))
    grads = mf.lg_gradients(op)
    for k, v in grads.items():
        rows.append(_row(f"meanfield.lg.grad{k}",
                         "potential gradient vanishes at the solved point",
                         v.is_zero()))
    ren = mf.renormalized_couplings(op)
    rows.append(_row("meanfield.renorm.first",
                     "level-zero renormalized couplings recover u_S and u_R",
                     ren[("P", 0)] == op.u_S and ren[("Q", 0)] == op.u_R))
    small = ch.small_phase_names()
    ok_rest = all(
        ren[(s, n)].restrict_zero(small) == ch.t(n, s).restrict_zero(small)
        for s in mf.SECTORS for n in range(cfg.ndesc + 1))
    rows.append(_row("meanfield.renorm.smallphase",
                     "renormalized couplings restrict to the bare ones",
                     ok_rest))
    f = eng.free_energy0()
    tP, tQ, tR, tS = ch.t(0, "P"), ch.t(0, "Q"), ch.t(0, "R"), ch.t(0, "S")
    expect = (tP * tP * tS).scale(rat(1, 2)) + tP * tQ * tR \
        + eng.f0_potential().eval(tQ)
    eq, d, diff = compare_to_depth(f.restrict_zero(small), expect, cfg.dt)
    rows.append(_row("meanfield.f0.smallphase",
                     "closed-form energy restricts to the four-coordinate one",
                     eq, depth=d, fail=_fail_info(diff)))
    sr = mf.string_residual(ch, f)
    eq, d, diff = compare_to_depth(sr, ch.zero(), cfg.dt)
    rows.append(_row("meanfield.f0.string",
                     "translation identity for the closed-form energy",
                     eq, depth=d, fail=_fail_info(diff)))
    dr = mf.dilaton_residual(ch, f)
    eq, d, diff = compare_to_depth(dr, ch.zero(), cfg.dt)
    rows.append(_row("meanfield.f0.dilaton",
                     "scaling identity for the closed-form energy",
                     eq, depth=d, fail=_fail_info(diff)))
    rows.append(_row("meanfield.f0.grading",
                     "weighted scaling annihilates the energy",
                     mf.grading_residual(ch, f).is_zero()))
    trr_ok, trr_depth = True, cfg.dt
    for (a, b, c) in _trr_samples(cfg.ndesc):
        r = mf.trr_residual(ch, f, a, b, c)
        eq, d, _ = compare_to_depth(r, ch.zero(), cfg.dt)
        trr_ok = trr_ok and eq
        trr_depth = min(trr_depth, d)
    rows.append(_row("meanfield.f0.recursion",
                     "descendant recursion on sampled index triples",
                     trr_ok, depth=trr_depth))
    flows = mf.hierarchy_flow_residuals(op, window=cfg.kz)
    ok = all(r[1] for rr in flows.values() for r in rr)
    dmin = min(r[2] for rr in flows.values() for r in rr)
    rows.append(_row("meanfield.flows.closed",
                     "all sixteen loop flows match their closed forms",
                     ok, depth=dmin))
    pairs = [((0, "P"), (1, "Q")), ((1, "P"), (2, "P")), ((0, "Q"), (0, "R")),
             ((1, "R"), (0, "S")), ((2, "Q"), (1, "S")), ((3, "P"), (0, "Q")),
             ((1, "Q"), (2, "R")), ((4, "P"), (0, "S")), ((2, "S"), (1, "P")),
             ((0, "R"), (3, "Q"))]
    pairs = [(a, b) for a, b in pairs
             if a[0] <= cfg.ndesc and b[0] <= cfg.ndesc]
    fc = mf.flow_commutativity_residuals(op, pairs)
    rows.append(_row("meanfield.flows.commute",
                     "mixed flow derivatives agree on every order parameter",
                     all(r[3] for r in fc), depth=min(r[4] for r in fc)))
    onep = mf.one_point_residuals(op, f, window=cfg.kz)
    ok = all(r[1] for rr in onep.values() for r in rr)
    dmin = min(r[2] for rr in onep.values() for r in rr)
    rows.append(_row("meanfield.onepoint.closed",
                     "loop images of the energy match the four closed forms",
                     ok, depth=dmin))
    samples = [(0, "P", 0, "S"), (1, "P", 0, "Q"), (0, "Q", 1, "R"),
               (2, "P", 1, "P"), (1, "Q", 1, "Q"), (0, "R", 0, "Q"),
               (1, "S", 0, "P"), (2, "Q", 0, "P")]
    samples = [s for s in samples if s[0] <= cfg.ndesc and s[2] <= cfg.ndesc]
    cres = mf.constitutive_residuals(op, f, cfg.kz, samples)
    rows.append(_row("meanfield.constitutive",
                     "second derivatives match the substituted two-point forms",
                     all(r[1] for r in cres), depth=min(r[2] for r in cres)))
    pairing = mf.two_point_pairing_big_residuals(op, cfg.kz)
    rows.append(_row("meanfield.twopoint.pairing",
                     "slot-sum factorization of the solved two-point object",
                     not pairing, depth=cfg.dt,
                     fail={"entries": pairing[:3]} if pairing else None))
    return rows


def _trr_samples(ndesc: int):
    out = []
    sec = mf.SECTORS
    for shift in (0, 1):
        for a in range(1, ndesc + 1):
            for i, asec in enumerate(sec):
                b = (a + i + shift) % (ndesc + 1)
                c = (2 * a + i) % (ndesc + 1)
                bsec = sec[(i + a + shift) % 4]
                csec = sec[(i + 2 * a + 1 + shift) % 4]
                out.append(((a, asec), (b, bsec), (c, csec)))
                if len(out) >= 24:
                    return out
    return out


def suite_npoint(eng: Engine) -> list[CheckRow]:
    rows = []
    cfg = eng.cfg
    ch = eng.chart()
    op = eng.order_params()
    win = cfg.kz
    zmin = -(cfg.ndesc + 1)
    for names in (("P", "Q", "R"), ("Q", "Q", "Q"), ("P", "P", "S"),
                  ("P", "P", "R"), ("P", "Q", "Q"), ("P", "P", "Q")):
        loop = mf.npoint_loop(op, list(names), win)
        closed = mf.three_point_closed(op, names, win)
        ok, d, diff = mf.laurent_residual_depth(
            loop, closed, ch, zmin, mf.npoint_compare_depth(ch, 1))
        rows.append(_row(f"npoint.three.{''.join(names)}",
                         "loop route equals the closed three-point form",
                         ok, depth=d))
    for names in (("S", "P", "S"), ("R", "P", "S"), ("Q", "P", "S")):
        loop = mf.npoint_loop(op, list(names), win)
        ok = all(c.truncate_counted(mf.npoint_compare_depth(ch, 1)).is_zero()
                 for p, c in loop.terms.items()
                 if all(x >= zmin for x in p))
        rows.append(_row(f"npoint.zero.{''.join(names)}",
                         "vanishing three-point pattern", ok))
    for n in (1, 2, 3):
        d = mf.npoint_compare_depth(ch, n)
        bell = mf.bell_tail_qr(op, n, win)
        loopv = mf.npoint_loop(op, ["P"] * n + ["Q", "R"], win)
        ok1, d1, _ = mf.laurent_residual_depth(loopv, bell, ch, zmin, d)
        rows.append(_row(f"npoint.bell.qr{n}",
                         "partition form for the leading insertions", ok1,
                         depth=d1))
        loops = mf.npoint_loop(op, ["P"] * n + ["P", "S"], win)
        ok2, d2, _ = mf.laurent_residual_depth(loops, bell, ch, zmin, d)
        rows.append(_row(f"npoint.bell.ps{n}",
                         "the other tail shares the same closed form", ok2,
                         depth=d2))
        r = mf.compact_form_residual(op, n, win, "qr")
        ok3 = all(c.truncate_counted(min(c.prec, d)).is_zero()
                  for p, c in r.terms.items()
                  if all(zmin <= x <= 0 for x in p))
        rows.append(_row(f"npoint.compact.qr{n}",
                         "slot-sum times the n-point equals the derivative form",
                         ok3, depth=d))
        br = mf.bell_tail_r(op, n, win)
        loopr = mf.npoint_loop(op, ["P"] * (n + 1) + ["R"], win)
        ok4, d4, _ = mf.laurent_residual_depth(loopr, br, ch, zmin, d)
        rows.append(_row(f"npoint.bell.r{n}",
                         "partition form for the remaining tail", ok4,
                         depth=d4))
        r2 = mf.compact_form_residual(op, n, win, "r")
        ok5 = all(c.truncate_counted(min(c.prec, d)).is_zero()
                  for p, c in r2.terms.items()
                  if all(zmin <= x <= 0 for x in p))
        rows.append(_row(f"npoint.compact.r{n}",
                         "derivative form for the remaining tail", ok5,
                         depth=d))
    return rows


def suite_hierarchy(eng: Engine) -> list[CheckRow]:
    rows = []
    cfg = eng.cfg
    seeds = (cfg.seed, cfg.seed + 1, cfg.seed + 2)
    g2 = hg.degree_zero_constant(2)
    rows.append(_row("hierarchy.constant.g2",
                     "genus-two constant from the even zeta ladder",
                     g2 == rat(-5, 144)))
    for seed in seeds:
        gd = eng.genus_data(seed)
        tag = f"seed{seed - cfg.seed}"
        dres = hg.deformed_residuals(gd)
        ok = all(v[0] for v in dres.values())
        dmin = min(v[1] for v in dres.values())
        rows.append(_row(f"hierarchy.deformed.{tag}",
                         "definitional deformation equals the closed forms",
                         ok, depth=dmin))
        fres = hg.allgenus_flow_residuals(gd)
        ok = all(r[1] for r in fres)
        dmin = min(r[2] for r in fres)
        bad = [r[0] for r in fres if not r[1]][:3]
        rows.append(_row(f"hierarchy.flows.{tag}",
                         "every deformed flow matches its bracket",
                         ok, depth=dmin,
                         fail={"flows": bad} if bad else None))
        gres = hg.grading_residuals(gd)
        rows.append(_row(f"hierarchy.grading.{tag}",
                         "weighted scaling annihilates every genus",
                         all(r.is_zero() for r in gres.values())))
        jet_ok = True
        for g in range(1, cfg.gmax + 1):
            r = gd.log_jet_residual(g)
            eq, _, _ = compare_to_depth(r, eng.chart().zero(), cfg.dt)
            jet_ok = jet_ok and eq
        rows.append(_row(f"hierarchy.jets.{tag}",
                         "space derivative factors through the two jets",
                         jet_ok))
    return rows


def suite_dualgeom(eng: Engine) -> list[CheckRow]:
    rows = []
    ch = dg.PencilChart.build()
    rows.append(_row("dualgeom.pencil.rrel",
                     "degree matrix reproduces the intersection pairing",
                     mat_is_zero(dg.r_relation_residual(ch))))
    rows.append(_row("dualgeom.pencil.antisym",
                     "half-integer degree matrix anticommutes with the metric",
                     mat_is_zero(dg.v_antisymmetry_residual(ch))))
    gamma = dg.christoffel(ch)
    exp = dg.expected_christoffel(ch)
    ok = all((gamma[a][b][c] - exp[a][b][c]).is_zero()
             for a in range(4) for b in range(4) for c in range(4))
    rows.append(_row("dualgeom.pencil.christoffel",
                     "connection components match the closed list", ok))
    rows.append(_row("dualgeom.pencil.lowered",
                     "lowered connection equals the constant tables",
                     not dg.gamma_lowered_residuals(ch)))
    rows.append(_row("dualgeom.pencil.product",
                     "constant tables factor through the coordinate product",
                     not dg.gamma_product_residuals(ch)))
    x = dg.general_period(ch)
    rows.append(_row("dualgeom.periods.system",
                     "five-parameter solution satisfies the period system",
                     not dg.period_system_residuals(ch, x)))
    rows.append(_row("dualgeom.periods.metric",
                     "dual coordinate pairing is the constant matrix",
                     mat_eq(dg.dual_metric(ch),
                            dg.expected_dual_metric(ch.table))))
    rows.append(_row("dualgeom.periods.tau",
                     "quadratic invariant recovers the last coordinate",
                     dg.tau_identity_residual(ch).is_zero()))
    ch0 = dg.Lambda0Chart.build()
    cmat = ch0.c_matrices()
    rows.append(_row("dualgeom.star.einverse",
                     "closed-form inverse of the scaling field",
                     all(r.is_zero()
                         for r in dg.euler_inverse_residual(ch0, cmat))))
    rows.append(_row("dualgeom.star.unit",
                     "the scaling field is the star-product unit",
                     not dg.star_unit_residuals(ch0, cmat)))
    rows.append(_row("dualgeom.star.assoc",
                     "star product associative on all basis triples",
                     not dg.star_associativity_residuals(ch0, cmat)))
    rows.append(_row("dualgeom.dualenergy",
                     "hatted quadratic form reproduces the energy",
                     dg.dual_energy_residual(ch0).is_zero()))
    p, e_comp, unit_comp = dg.euler_in_dual_coordinates(ch0)
    ok_e = all((e_comp[i] + p[i]).is_zero() for i in range(4))
    rows.append(_row("dualgeom.dualcoords.euler",
                     "scaling field is minus the coordinate scaling", ok_e))
    ok_u = ((unit_comp[0] + p[0] * p[0]).is_zero()
            and (unit_comp[1] + p[0] * p[1]).is_zero()
            and unit_comp[2].is_zero()
            and (unit_comp[3] - ch0.sym("tS")).is_zero())
    rows.append(_row("dualgeom.dualcoords.unit",
                     "unit field components in dual coordinates", ok_u))
    chd = dg.DualChart.build()
    rows.append(_row("dualgeom.fstar.hessian",
                     "all sixteen second derivatives match the ledger",
                     mat_eq(dg.dual_potential_hessian(chd),
                            dg.expected_dual_hessian(chd))))
    rows.append(_row("dualgeom.fstar.homogeneity",
                     "scaling identity of the dual potential",
                     dg.dual_homogeneity_residual(chd).is_zero()))
    rows.append(_row("dualgeom.fstar.assoc",
                     "dual associativity equations hold symbolically",
                     not dg.dual_wdvv_residuals(chd)))
    for nu_str in eng.cfg.nus:
        nu = parse_rat(nu_str)
        tch = dg.TwistedChart.build(nu)
        ps = dg.twisted_periods(tch)
        bad = []
        for i in range(4):
            bad += dg.twisted_system_residuals(tch, ps[i])
        tag = nu_str.replace("/", "_").replace("-", "m")
        rows.append(_row(f"dualgeom.twisted.system.{tag}",
                         "deformed period system satisfied", not bad))
        rows.append(_row(f"dualgeom.twisted.ladder.{tag}",
                         "derivative ladder lowers the parameter",
                         not dg.ladder_residuals(tch)))
        rows.append(_row(f"dualgeom.twisted.inverse.{tag}",
                         "inverse chart identities in ring form",
                         not dg.inverse_chart_residuals(tch)))
        rows.append(_row(f"dualgeom.twisted.hessian.{tag}",
                         "pairing is the scaled Hessian of the last coordinate",
                         not dg.hessian_form_residuals(tch)))
        rows.append(_row(f"dualgeom.laplace.{tag}",
                         "moment rule reproduces all four deformed coordinates",
                         not dg.laplace_residuals(tch)))
    return rows


def suite_kahler(eng: Engine) -> list[CheckRow]:
    rows = []
    ch = kh.TChart.build()
    rows.append(_row("kahler.frame.columns",
                     "sections equal the pairing columns at argument -1",
                     not kh.frame_consistency_residuals(ch)))
    rows.append(_row("kahler.frame.periods",
                     "first field expands on the classical period vector",
                     not kh.period_vector_residuals(ch)))
    om = kh.omega_coordinates(ch)
    rows.append(_row("kahler.omega.matrix",
                     "coordinate matrix of the two-form",
                     mat_eq(om, kh.expected_omega(ch))))
    rows.append(_row("kahler.omega.closed",
                     "the two-form is closed",
                     not kh.d_omega_residuals(ch)))
    rows.append(_row("kahler.omega.darboux",
                     "product-coordinate wedge form equals the two-form",
                     not kh.darboux_residuals(ch)))
    rows.append(_row("kahler.hermitian.ledger",
                     "all metric entries match, lower triangle by symmetry",
                     mat_eq(kh.hermitian_matrix(ch),
                            kh.expected_hermitian(ch))))
    hk = kh.HKChart.build()
    k0, hm = kh.hk_metric(hk)
    rows.append(_row("kahler.hk.metric",
                     "potential Hessian equals the displayed matrix",
                     mat_eq(hm, kh.expected_hk_metric(hk))))
    rows.append(_row("kahler.hk.metric.form",
                     "form-and-involution route gives the same metric",
                     mat_eq(hm, kh.hk_metric_from_form(hk))))
    rows.append(_row("kahler.hk.metric.inverse",
                     "closed-form inverse checks out",
                     kh.hk_metric_inverse_check(hk)))
    rows.append(_row("kahler.hk.connection.u",
                     "first connection matrix matches",
                     mat_eq(kh.connection_matrix(hk, "u"),
                            kh.expected_connection_u(hk))))
    rows.append(_row("kahler.hk.connection.v",
                     "second connection matrix matches",
                     mat_eq(kh.connection_matrix(hk, "v"),
                            kh.expected_connection_v(hk))))
    rows.append(_row("kahler.hk.parallel",
                     "the two-form is parallel in all four directions",
                     all(mat_is_zero(kh.nabla_omega_residual(hk, y))
                         for y in kh.HK)))
    rows.append(_row("kahler.hk.darboux",
                     "two-form from the potential gradients",
                     mat_is_zero(kh.darboux_from_potential_residual(hk))))
    cs = kh.hk_c_matrices(hk)
    rows.append(_row("kahler.hk.products",
                     "multiplication matrices in adapted coordinates",
                     all(mat_eq(cs[i], kh.expected_hk_c(hk)[i])
                         for i in range(4))))
    _, bad = kh.tau_hk_structure_residual(hk)
    rows.append(_row("kahler.tau.structure",
                     "involution is the gauge ratio times a unipotent block",
                     not bad))
    rows.append(_row("kahler.tau.square",
                     "involution squares to the identity",
                     mat_is_zero(kh.tau_square_residual(hk))))
    comp = kh.compatibility_residuals(hk)
    rows.append(_row("kahler.compat.pairs",
                     "all six covariant commutator pairs agree",
                     all(v[2] for v in comp.values())))
    lhs_ux = comp[("u", "x")][0]
    u2 = hk.sym("u", -2)
    ok_ux = ((lhs_ux[0][3] + u2).is_zero()
             and all(lhs_ux[a][b].is_zero() for a in range(4)
                     for b in range(4) if (a, b) != (0, 3)))
    rows.append(_row("kahler.compat.uxvalue",
                     "the (u, x) commutator has its single displayed entry",
                     ok_ux))
    rows.append(_row("kahler.compat.wxzero",
                     "the (w, x) commutators vanish",
                     mat_is_zero(comp[("w", "x")][0])))
    pat = kh.cbar_commutator_pattern(hk)
    names = {(a, b) for a, b, _ in pat}
    rows.append(_row("kahler.cbar.pattern",
                     "conjugate commutators vanish except the stated four",
                     names == {("u", "ubar"), ("u", "vbar"),
                               ("v", "ubar"), ("v", "vbar")}))
    vv = next((c for a, b, c in pat if (a, b) == ("v", "vbar")), None)
    u1 = hk.sym("u", -1)
    ub1 = hk.sym("ub", -1)
    want13 = (hk.f0b(3) - hk.f0(3)) * u1 * ub1
    rows.append(_row("kahler.cbar.vvalue",
                     "the (v, conj v) commutator entry matches",
                     vv is not None and (vv[0][2] - want13).is_zero()))
    cb = kh.cbar_matrices(hk)
    rows.append(_row("kahler.cbar.xentry",
                     "conjugated top matrix has the single conjugate entry",
                     (cb[3][0][3] - ub1).is_zero()))
    mch = kh.MonodromyChart.build()
    t = kh.monodromy_transition(mch)
    e = kh.exp_nilpotent()
    rows.append(_row("kahler.monodromy.exp",
                     "frame transition equals the exponential of the cup matrix",
                     all(t[i][j] == e[i][j] for i in range(4)
                         for j in range(4))))
    rows.append(_row("kahler.monodromy.nilpotent",
                     "cup matrix is nilpotent of order four",
                     kh.nilpotency_order() == 4))
    return rows


SUITE_FUNCS = {
    "mirror": suite_mirror,
    "smallphase": suite_smallphase,
    "meanfield": suite_meanfield,
    "npoint": suite_npoint,
    "hierarchy": suite_hierarchy,
    "dualgeom": suite_dualgeom,
    "kahler": suite_kahler,
}


def run_suites(names, cfg: RunConfig) -> dict:
    eng = Engine(cfg)
    if "all" in names:
        names = list(SUITES)
    rows: list[CheckRow] = []
    for name in names:
        fn = SUITE_FUNCS.get(name)
        if fn is None:
            raise ConfigError(f"unknown suite {name!r}; choose from "
                              f"{', '.join(SUITES)} or all")
        rows.extend(fn(eng))
    rows.sort(key=lambda r: r.check_id)
    passed = sum(1 for r in rows if r.passed)
    return {
        "suites": sorted(set(names)),
        "config": cfg.echo(),
        "checks": [r.as_dict() for r in rows],
        "summary": {"total": len(rows), "passed": passed,
                    "failed": len(rows) - passed},
        "status": "pass" if passed == len(rows) else "fail",
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
