"""Absolute-parallelism geometry of tetrad fields on a small 4D grid patch.

Array conventions (trailing axes are the four grid axes of a patch):

* ``E[a, mu]``  = e^a_mu (tetrad), ``Einv[mu, a]`` = e^mu_a
* ``g[mu, nu]``, ``ginv[mu, nu]``
* connections ``C[alpha, beta, gamma]`` = C^alpha_{beta gamma}, the last index
  is the differentiation index
* curvatures ``K[alpha, beta, gamma, eta]`` = K^alpha_{beta gamma eta},
  antisymmetric in the last pair

Derivatives on a patch are non-periodic central differences; each
derivative trims one sample from every side of every axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])


@dataclass(frozen=True)
class Config4D:
    nu: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.nu == 0:
            raise ValueError("nu must be non-zero")
        if not self.c > 0:
            raise ValueError("c must be positive")


# --- group elements ----------------------------------------------------------


def lorentz_boost(v, c: float = 1.0) -> np.ndarray:
    """Pure boost with rapidity th(Theta) = |v|/c and Delta = 2 sh^2(Theta/2).

    The (y, z) spatial entry is taken as Delta cos(a_y) cos(a_z), matching (z, y);
    without that symmetry L^T eta L = eta fails.
    """
    v = np.asarray(v, dtype=float)
    speed = float(np.linalg.norm(v))
    if speed >= c:
        raise ValueError(f"|v| = {speed} must be below c = {c}")
    L = np.eye(4)
    if speed == 0:
        return L
    theta = np.arctanh(speed / c)
    n = v / speed
    delta = 2 * np.sinh(theta / 2) ** 2
    L[0, 0] = np.cosh(theta)
    L[0, 1:] = L[1:, 0] = -np.sinh(theta) * n
    L[1:, 1:] += delta * np.outer(n, n)
    return L


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def _rx(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


def rotation_from_euler(theta: float, phi: float, chi: float) -> np.ndarray:
    """4x4 rotation: clockwise turns by phi about z, theta about the line of nodes, chi about the new z."""
    if not all(np.isfinite([theta, phi, chi])):
        raise ValueError("angles must be finite")
    R = np.eye(4)
    R[1:, 1:] = _rz(phi) @ _rx(theta) @ _rz(chi)
    return R


def compose_frame(R: np.ndarray, L: np.ndarray, reference_inverse: np.ndarray | None = None) -> np.ndarray:
    """Tetrad e^a_mu of the frame e^mu_a = (R L)_a^b e_hat^mu_b.

    ``reference_inverse`` is e_hat^mu_b (default the identity); returns e^a_mu.
    """
    ref = np.eye(4) if reference_inverse is None else np.asarray(reference_inverse, dtype=float)
    frame = ref @ (R @ L).T  # [mu, a]
    return np.linalg.inv(frame)


# --- tetrad catalog ----------------------------------------------------------


def _rot_active(a):
    c, s = np.cos(a), np.sin(a)
    z, o = np.zeros_like(a), np.ones_like(a)
    return np.array([[c, -s, z], [s, c, z], [z, z, o]])


def _constant(M):
    M = np.asarray(M, dtype=float)

    def fn(X):
        shape = np.shape(X[0])
        return np.broadcast_to(M.reshape((4, 4) + (1,) * len(shape)), (4, 4) + shape).astype(np.result_type(X[0], float))

    return fn


def rotating_frame(omega: float = 0.5, frame_rate: float = 0.0, c: float = 1.0):
    """Coordinates rotating at ``omega`` about z; the spatial legs turn at ``frame_rate`` relative to the lab.

    e^0 = dx^0 and e^i = R((omega - frame_rate) t)(dx + omega x r dt) with
    t = x^0/c. ``frame_rate = 0`` is the lab frame written in rotating
    coordinates (holonomic, zero torsion); any other rate gives a genuinely
    torsional tetrad.
    """

    def fn(X):
        x0, x, y, _ = X
        t = x0 / c
        R = _rot_active((omega - frame_rate) * t)
        z, o = np.zeros_like(x0), np.ones_like(x0)
        # rows: dx^i + (omega x r)^i dt in terms of (dx^0, dx, dy, dz)
        B = np.array([[-omega * y / c, o, z, z], [omega * x / c, z, o, z], [z, z, z, o]])
        E = np.empty((4, 4) + np.shape(x0), dtype=np.result_type(x0, float))
        E[0] = np.array([o, z, z, z])
        E[1:] = np.einsum("ij...,jm...->im...", R, B)
        return E

    return fn


def sinusoidal(eps: float = 0.05, k=(0.3, 0.5, 0.0, 0.4), seed: int = 7):
    """Identity plus a weak plane-wave perturbation eps sin(k.x) P with a fixed random P."""
    P = np.random.default_rng(seed).standard_normal((4, 4))
    k = np.asarray(k, dtype=float)

    def fn(X):
        phase = sum(k[m] * X[m] for m in range(4))
        s = np.sin(phase)
        return np.eye(4).reshape((4, 4) + (1,) * np.ndim(s)) + eps * P.reshape((4, 4) + (1,) * np.ndim(s)) * s

    return fn


def perturbed(base, eps: float = 0.05, seed: int = 7):
    """(I + eps sin(k.x) P) applied to the legs of ``base``."""
    pert = sinusoidal(eps, seed=seed)

    def fn(X):
        return np.einsum("ab...,bm...->am...", pert(X), base(X))

    return fn


def catalog_entry(name: str, **params):
    if name == "identity":
        return _constant(np.eye(4))
    if name == "boost":
        return _constant(lorentz_boost(params.get("v", (0.6, 0.0, 0.0)), params.get("c", 1.0)))
    if name == "rotation":
        R = rotation_from_euler(params.get("theta", 0.4), params.get("phi", 0.7), params.get("chi", -0.3))
        return _constant(R)
    if name == "rotating_frame":
        return rotating_frame(params.get("omega", 0.5), params.get("frame_rate", 0.25), params.get("c", 1.0))
    if name == "sinusoidal":
        return sinusoidal(params.get("eps", 0.05))
    if name == "perturbed_rotating_frame":
        base = rotating_frame(params.get("omega", 0.5), params.get("frame_rate", 0.25), params.get("c", 1.0))
        return perturbed(base, params.get("eps", 0.05))
    raise ValueError(f"unknown tetrad {name!r}; known: {', '.join(CATALOG)}")


CATALOG = ("boost", "identity", "perturbed_rotating_frame", "rotating_frame", "rotation", "sinusoidal")


# --- sampled fields ----------------------------------------------------------


@dataclass(frozen=True)
class TetradField4D:
    E: np.ndarray  # (4, 4, n, n, n, n)
    spacing: float
    center: tuple
    margin: int = 0  # samples already trimmed relative to the original patch
    Einv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        Ein = np.moveaxis(np.linalg.inv(np.moveaxis(self.E, (0, 1), (-2, -1))), (-2, -1), (0, 1))
        object.__setattr__(self, "Einv", Ein)

    @property
    def npoints(self) -> int:
        return self.E.shape[-1]

    def inverse_defect(self) -> float:
        prod = np.einsum("am...,mb...->ab...", self.E, self.Einv)
        return float(np.max(np.abs(prod - np.eye(4).reshape((4, 4) + (1,) * 4))))


def patch_coords(center, spacing: float, n: int):
    c = np.asarray(center, dtype=float)
    off = spacing * (np.arange(n) - (n - 1) / 2)
    return np.meshgrid(*(c[m] + off for m in range(4)), indexing="ij")


def sample_tetrad(fn, center=(0.0, 1.0, 0.5, 0.0), spacing: float = 0.05, n: int = 16) -> TetradField4D:
    if n < 5:
        raise ValueError("a 4D patch needs at least 5 samples per axis")
    E = np.asarray(fn(patch_coords(center, spacing, n)), dtype=float)
    det = np.linalg.det(np.moveaxis(E, (0, 1), (-2, -1)))
    if np.min(np.abs(det)) < 1e-12:
        raise ValueError("tetrad is singular on the patch")
    return TetradField4D(E, spacing, tuple(float(x) for x in center))


def _d(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Central difference along grid ``axis`` (0..3), interior only (trims 1 everywhere)."""
    out = arr
    lead = arr.ndim - 4
    sl = [slice(None)] * lead
    for m in range(4):
        if m == axis:
            hi = out[tuple(sl + [slice(None)] * m + [slice(2, None)])]
            lo = out[tuple(sl + [slice(None)] * m + [slice(None, -2)])]
            out = (hi - lo) / (2 * h)
        else:
            out = out[tuple(sl + [slice(None)] * m + [slice(1, -1)])]
    return out


def _crop(arr: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return arr
    lead = arr.ndim - 4
    return arr[tuple([slice(None)] * lead + [slice(k, -k)] * 4)]


def _grad(arr: np.ndarray, h: float) -> np.ndarray:
    """Stack of the four derivatives on the last new axis: out[..., gamma, grid]."""
    parts = [_d(arr, m, h) for m in range(4)]
    return np.stack(parts, axis=arr.ndim - 4)


def metric_from_tetrad(E: np.ndarray) -> np.ndarray:
    """g_{mu nu} = eta_ab e^a_mu e^b_nu."""
    return np.einsum("ab,am...,bn...->mn...", ETA, E, E)


def _inv4(M: np.ndarray) -> np.ndarray:
    return np.moveaxis(np.linalg.inv(np.moveaxis(M, (0, 1), (-2, -1))), (-2, -1), (0, 1))


def rotational_metric(T: np.ndarray) -> np.ndarray:
    """H_{gamma mu} = T^alpha_{beta gamma} T^beta_{alpha mu}."""
    return np.einsum("abg...,bam...->gm...", T, T)


@dataclass(frozen=True)
class ConnectionDecomposition:
    Delta: np.ndarray
    Gamma: np.ndarray
    T: np.ndarray  # covariant-derivative route (e nabla e)
    T_anholonomity: np.ndarray  # route through the object of anholonomity
    g: np.ndarray
    ginv: np.ndarray
    E: np.ndarray
    Einv: np.ndarray
    dg: np.ndarray  # dg[mu, nu, gamma] = d_gamma g_{mu nu}
    spacing: float
    margin: int


def christoffel(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma^a_{bc} = 1/2 g^{am}(d_c g_{bm} + d_b g_{cm} - d_m g_{bc}); dg[m, n, c] = d_c g_{mn}."""
    low = 0.5 * (np.einsum("bmc...->mbc...", dg) + np.einsum("cmb...->mbc...", dg) - dg.transpose((2, 0, 1) + tuple(range(3, dg.ndim))))
    return np.einsum("am...,mbc...->abc...", ginv, low)


def anholonomity_object(Einv: np.ndarray, dE: np.ndarray) -> np.ndarray:
    """Omega_{beta gamma}^alpha = 1/2 e^alpha_b (d_beta e^b_gamma - d_gamma e^b_beta), stored as O[alpha, beta, gamma].

    ``dE[b, mu, gamma]`` = d_gamma e^b_mu.
    """
    d_beta_e_gamma = np.einsum("bgs...->bsg...", dE)  # [b, beta, gamma] = d_beta e^b_gamma
    return 0.5 * np.einsum("ab...,bsg...->asg...", Einv, d_beta_e_gamma - dE)


def torsion_from_anholonomity(O: np.ndarray, g: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """T^a_{bc} = -O^a_{bc} + g^{am}(g_{bn} O^n_{mc} + g_{cn} O^n_{mb})."""
    inner = np.einsum("bn...,nmc...->bmc...", g, O) + np.einsum("cn...,nmb...->bmc...", g, O)
    return -O + np.einsum("am...,bmc...->abc...", ginv, inner)


def connection_suite(tf: TetradField4D) -> ConnectionDecomposition:
    """Weitzenboeck connection, Christoffel symbols and torsion (two routes) on the patch interior."""
    h = tf.spacing
    E = tf.E
    dE = _grad(E, h)  # [a, mu, gamma]
    E1, Einv1 = _crop(E, 1), _crop(tf.Einv, 1)
    Delta = np.einsum("ma...,abg...->mbg...", Einv1, dE)
    g_full = metric_from_tetrad(E)
    if np.min(np.abs(np.linalg.det(np.moveaxis(g_full, (0, 1), (-2, -1))))) < 1e-14:
        raise ValueError("singular metric")
    dg = _grad(g_full, h)
    g = _crop(g_full, 1)
    ginv = _inv4(g)
    Gamma = christoffel(ginv, dg)
    # e^alpha_b nabla_gamma e^b_beta with nabla_gamma e^b_beta = d_gamma e^b_beta - Gamma^mu_{beta gamma} e^b_mu
    nabla_e = dE - np.einsum("mbg...,am...->abg...", Gamma, E1)
    T = np.einsum("ma...,abg...->mbg...", Einv1, nabla_e)
    O = anholonomity_object(Einv1, dE)
    T9 = torsion_from_anholonomity(O, g, ginv)
    return ConnectionDecomposition(Delta, Gamma, T, T9, g, ginv, E1, Einv1, dg, h, tf.margin + 1)


def _mat_curv(C: np.ndarray, dC: np.ndarray) -> np.ndarray:
    """d_gamma C_eta - d_eta C_gamma + C_gamma C_eta - C_eta C_gamma; dC[a, b, eta, gamma] = d_gamma C^a_{b eta}."""
    C1 = _crop(C, 1)
    deriv = np.einsum("abeg...->abge...", dC) - dC
    prod = np.einsum("amg...,mbe...->abge...", C1, C1)
    return deriv + prod - np.einsum("abge...->abeg...", prod)


def covariant_derivative_T(T: np.ndarray, dT: np.ndarray, Gamma: np.ndarray) -> np.ndarray:
    """N[a, b, e, g] = nabla_g T^a_{b e} with respect to the Christoffel symbols."""
    T1, G1 = _crop(T, 1), _crop(Gamma, 1)
    return (
        dT
        + np.einsum("amg...,mbe...->abeg...", G1, T1)
        - np.einsum("mbg...,ame...->abeg...", G1, T1)
        - np.einsum("meg...,abm...->abeg...", G1, T1)
    )


@dataclass(frozen=True)
class CurvatureReport:
    S: np.ndarray
    R: np.ndarray
    R_from_T: np.ndarray
    R_from_T_partial: np.ndarray
    ricci: np.ndarray
    X: np.ndarray
    scalar: float | np.ndarray
    scalar_printed: np.ndarray
    T_geom: np.ndarray
    rho_matter: np.ndarray
    trace_residual: float
    g: np.ndarray
    ginv: np.ndarray


def curvature_suite(conn: ConnectionDecomposition, config: Config4D = Config4D()) -> CurvatureReport:
    """Curvatures of the Weitzenboeck and Levi-Civita connections and the torsion-built tensors.

    R_from_T uses the Christoffel-covariant derivative of T,
    -(nabla_g T_e - nabla_e T_g) - [T_g, T_e]; the same expression with
    partial derivatives is returned as ``R_from_T_partial`` for comparison.
    """
    h = conn.spacing
    D, G, T = conn.Delta, conn.Gamma, conn.T
    dD, dG, dT = _grad(D, h), _grad(G, h), _grad(T, h)
    S = _mat_curv(D, dD)
    R = _mat_curv(G, dG)
    T1 = _crop(T, 1)
    TT = np.einsum("amg...,mbe...->abge...", T1, T1)
    comm = TT - np.einsum("abge...->abeg...", TT)
    N = covariant_derivative_T(T, dT, G)
    # N and dT are stored [alpha, beta, eta, gamma]; swap to [.., gamma, eta]
    R_from_T = -(np.einsum("abeg...->abge...", N) - N) - comm
    R_from_T_partial = -(np.einsum("abeg...->abge...", dT) - dT) - comm
    ricci = np.einsum("abae...->be...", R_from_T)
    g1, ginv1 = _crop(conn.g, 1), _crop(conn.ginv, 1)
    # X_{ab} = nabla_[g T^g_{|a|b]} + T^g_{m[g} T^m_{|a|b]}
    divT = np.einsum("gabg...->ab...", N)
    trT = np.einsum("gagb...->ab...", N)  # nabla_b T^g_{a g}
    tt1 = np.einsum("gmg...,mab...->ab...", T1, T1)
    tt2 = np.einsum("gmb...,mag...->ab...", T1, T1)
    X = 0.5 * (divT - trT) + 0.5 * (tt1 - tt2)
    trX = np.einsum("ab...,ab...->...", ginv1, X)
    scalar = -2 * trX
    # the same contraction with the torsion-squared term doubled, as printed
    scalar_printed = -2 * np.einsum("ab...,ab...->...", ginv1, 0.5 * (divT - trT) + (tt1 - tt2))
    T_geom = -(2 / config.nu) * (X - 0.5 * g1 * trX)
    rho = 2 * trX / (config.c**2 * config.nu)
    trace = np.einsum("ab...,ab...->...", ginv1, T_geom) / config.c**2
    scale = max(1.0, float(np.max(np.abs(rho))))
    return CurvatureReport(
        S, R, R_from_T, R_from_T_partial, ricci, X, scalar, scalar_printed, T_geom, rho,
        float(np.max(np.abs(trace - rho)) / scale), g1, ginv1,
    )


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def identity_norms(conn: ConnectionDecomposition, curv: CurvatureReport) -> dict:
    """Infinity norms of every identity residual on the common interior."""
    G = conn.Gamma
    metric_compat = conn.dg - np.einsum("mag...,mb...->abg...", G, conn.g) - np.einsum("mbg...,am...->abg...", G, conn.g)
    return {
        "weitzenboeck_flatness": max_norm(curv.S),
        "riemann_from_torsion": max_norm(curv.R - curv.R_from_T),
        "riemann_from_torsion_partial": max_norm(curv.R - curv.R_from_T_partial),
        "ricci_from_torsion": max_norm(curv.ricci + 2 * curv.X),
        "decomposition": max_norm(conn.Delta - conn.Gamma - conn.T),
        "torsion_routes": max_norm(conn.T - conn.T_anholonomity),
        "metric_compatibility": max_norm(metric_compat),
        "christoffel_symmetry": max_norm(G - np.swapaxes(G, 1, 2)),
        "trace_identity": curv.trace_residual,
        "scalar_printed_mismatch": max_norm(curv.scalar - curv.scalar_printed),
        "torsion_magnitude": max_norm(conn.T),
        "riemann_magnitude": max_norm(curv.R),
    }


CONVERGING = ("weitzenboeck_flatness", "riemann_from_torsion", "ricci_from_torsion", "decomposition", "torsion_routes", "metric_compatibility")


def refinement_study(fn, center=(0.0, 1.0, 0.5, 0.0), spacing: float = 0.2, levels: int = 3, half_width: float | None = None, config=Config4D()):
    """Identity norms at spacings h, h/2, ... on a fixed physical box about ``center``.

    The curvature interior (two samples in from the patch edge) always spans
    [center - half_width, center + half_width] per axis (default half_width = h),
    so the sampled points of coarse levels are nested in the fine ones and the
    infinity norms are taken over the same region.
    """
    half_width = spacing if half_width is None else half_width
    rows = []
    for lev in range(levels):
        h = spacing / 2**lev
        n = 2 * (int(round(half_width / h)) + 2) + 1
        tf = sample_tetrad(fn, center, h, n)
        conn = connection_suite(tf)
        rows.append((h, identity_norms(conn, curvature_suite(conn, config))))
    return rows


# --- autoparallels -----------------------------------------------------------


class GeodesicError(RuntimeError):
    pass


def pointwise_connection(fn, x, h: float = 1e-20):
    """(E, Einv, Delta, Gamma) at one point, with complex-step derivatives of the closed-form tetrad."""
    x = np.asarray(x, dtype=float)
    X = [x[m] + 1j * h * np.eye(4)[m] for m in range(4)]  # column gamma perturbs x^gamma
    Ec = np.asarray(fn(X))  # (4, 4, 4dir)
    E = Ec[..., 0].real
    dE = Ec.imag / h  # [a, mu, gamma]
    Einv = np.linalg.inv(E)
    Delta = np.einsum("ma,abg->mbg", Einv, dE)
    g = E.T @ ETA @ E
    dg = np.einsum("amg,ab,bn->mng", dE, ETA, E) + np.einsum("am,ab,bng->mng", E, ETA, dE)
    Gamma = christoffel(np.linalg.inv(g), dg)
    return E, Einv, Delta, Gamma


@dataclass(frozen=True)
class GeodesicResult:
    s: np.ndarray
    x: np.ndarray  # (n, 4)
    u: np.ndarray  # (n, 4)
    frames: np.ndarray  # (n, 4, 4): frames[k, mu, b] = e^mu_b transported
    norms: np.ndarray  # g(u, u) per sample

    @property
    def normalization_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])))


def geodesic_integrate(fn, x0, u0, frame0=None, steps: int = 1000, ds: float = 0.01, bounds=None, drift_tol: float = 1e-6) -> GeodesicResult:
    """RK4 for d2x/ds2 + (Gamma + T) u u = 0 and de_b/ds + (Gamma + T) e_b u = 0.

    ``u0`` must satisfy g(u, u) = -1. ``bounds`` is an optional (lo, hi)
    pair of 4-vectors; leaving it raises :class:`GeodesicError`, as does
    a normalization drift above ``drift_tol``.
    """
    x0 = np.asarray(x0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    E0, Einv0, _, _ = pointwise_connection(fn, x0)
    g0 = E0.T @ ETA @ E0
    n0 = float(u0 @ g0 @ u0)
    if abs(n0 + 1) > 1e-10:
        raise ValueError(f"initial four-velocity has g(u, u) = {n0}, expected -1")
    F0 = Einv0.copy() if frame0 is None else np.asarray(frame0, dtype=float)

    def rhs(x, u, F):
        _, _, D, G = pointwise_connection(fn, x)
        conn = G + (D - G)  # Gamma + T
        return u, -np.einsum("abg,b,g->a", conn, u, u), -np.einsum("abg,bk,g->ak", conn, F, u)

    xs, us, Fs, norms = [x0], [u0], [F0], [n0]
    x, u, F = x0, u0, F0
    for _ in range(steps):
        k1 = rhs(x, u, F)
        k2 = rhs(x + 0.5 * ds * k1[0], u + 0.5 * ds * k1[1], F + 0.5 * ds * k1[2])
        k3 = rhs(x + 0.5 * ds * k2[0], u + 0.5 * ds * k2[1], F + 0.5 * ds * k2[2])
        k4 = rhs(x + ds * k3[0], u + ds * k3[1], F + ds * k3[2])
        x = x + ds / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        u = u + ds / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        F = F + ds / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if bounds is not None and (np.any(x < bounds[0]) or np.any(x > bounds[1])):
            raise GeodesicError(f"path left the patch at x = {x}")
        E, _, _, _ = pointwise_connection(fn, x)
        nrm = float(u @ (E.T @ ETA @ E) @ u)
        if not np.isfinite(nrm) or abs(nrm - n0) > drift_tol:
            raise GeodesicError(f"four-velocity normalization drifted to {nrm}")
        xs.append(x)
        us.append(u)
        Fs.append(F)
        norms.append(nrm)
    return GeodesicResult(ds * np.arange(steps + 1), np.array(xs), np.array(us), np.array(Fs), np.array(norms))


def rotating_frame_worldline(omega: float, frame_rate: float, x0, lab_velocity, t, c: float = 1.0) -> np.ndarray:
    """Closed-form autoparallel of :func:`rotating_frame` in its rotating coordinates.

    The lab velocity keeps its magnitude and turns at ``frame_rate`` about z
    (it is constant for the lab tetrad, frame_rate = 0); the lab position is
    integrated in closed form and rotated back by -omega t.
    """
    t = np.asarray(t, dtype=float)
    V0 = np.asarray(lab_velocity, dtype=float)
    X0 = np.asarray(x0, dtype=float)  # rotating and lab coordinates coincide at t = 0
    lam = frame_rate
    if abs(lam) < 1e-14:
        disp = np.outer(t, V0)
    else:
        s, cm = np.sin(lam * t), np.cos(lam * t) - 1
        disp = np.stack([(s * V0[0] + cm * V0[1]) / lam, (-cm * V0[0] + s * V0[1]) / lam, t * V0[2]], axis=1)
    X = X0 + disp
    a = -omega * t
    ca, sa = np.cos(a), np.sin(a)
    x = ca * X[:, 0] - sa * X[:, 1]
    y = sa * X[:, 0] + ca * X[:, 1]
    return np.stack([c * t, x, y, X[:, 2]], axis=1)


def rotating_frame_initial_velocity(omega: float, x0, lab_velocity, c: float = 1.0) -> np.ndarray:
    """Coordinate four-velocity (d/ds of (ct, x, y, z)) for a given lab 3-velocity at t = 0."""
    V = np.asarray(lab_velocity, dtype=float)
    gamma = 1 / np.sqrt(1 - V @ V / c**2)
    x0 = np.asarray(x0, dtype=float)
    xdot = V - np.cross([0.0, 0.0, omega], x0)  # rotating-frame coordinate velocity at t = 0
    return gamma * np.concatenate([[c], xdot])
