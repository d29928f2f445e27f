"""Second evaluation path for the bound evaluators.

Typed out again from the source formulas in mpmath at 40 digits, without
sharing any code or expression strings with the library, plus a parameter
sampler that stays inside each bound's step-size domain.
"""

import mpmath as mp

mp.mp.dps = 40


def _m(p, *keys):
    return [mp.mpf(repr(float(p[k]))) for k in keys]


def sgld_lsi(p):
    eta, K, B, M, G, L, d, lam, kl0 = _m(p, "eta", "K", "B", "M", "G", "L", "d", "lambda_lsi", "kl0")
    C2, C4 = _m({"C2": p.get("C2", 1.0), "C4": p.get("C4", 1.0)}, "C2", "C4")
    return {
        "main": [
            mp.e ** (-(lam * eta * K) / 2) * kl0,
            11 * L * L * eta * d / lam,
            7 * L * eta * (M * M * C2 * d + G * G) / (B * lam),
            1210 * eta * (M**4 * C4 * d * d + G**4) / (lam * B * B),
        ]
    }


def absgld_lsi(p):
    eta, K, M, G, L, d, lam, kl0, m1, m2 = _m(p, "eta", "K", "M", "G", "L", "d", "lambda_lsi", "kl0", "m1", "m2")
    return {
        "main": [
            mp.exp(-lam * eta * K / 4) * kl0,
            256 * eta / lam * (L * L * d + 2 * M * M * m2 * m2 + G * G),
            64 * L * L * eta * eta / lam * (M * m1 + M + G),
        ],
        "amortized_batch": [
            mp.mpf(2),
            G,
            50 * M / (lam * mp.sqrt(lam) * eta * K) * mp.sqrt(kl0),
            28 * M * mp.sqrt(eta) / lam * (L * mp.sqrt(d) + M * m2 + G),
            8 * L * eta / lam * mp.sqrt(2 * M * m1 + 2 * M + 2 * G),
        ],
    }


def sgld_fd_pi(p):
    eta, K, B, M, G, L, d, kl0 = _m(p, "eta", "K", "B", "M", "G", "L", "d", "kl0")
    C2, C4 = _m({"C2": p.get("C2", 1.0), "C4": p.get("C4", 1.0)}, "C2", "C4")
    s2 = M * M * C2 * d + G * G
    s4 = M**4 * C4 * d * d + G**4
    out = {"main": [4 * kl0 / (K * eta), 20 * L * L * eta * d, 12 * L * eta * s2 / B, 2304 * eta * s4 / (B * B)]}
    if p.get("lambda_pi") is not None:
        (lp,) = _m(p, "lambda_pi")
        out["tv_squared"] = [16 * kl0 / (lp * K * eta), 80 * L * L * eta * d / lp,
                             48 * L * eta * s2 / (lp * B), 9216 * eta * s4 / (lp * B * B)]
    return out


def sgld_traj_kl(p):
    eta, K, B, M, G, d = _m(p, "eta", "K", "B", "M", "G", "d")
    C4, C6 = _m({"C4": p.get("C4", 1.0), "C6": p.get("C6", 1.0)}, "C4", "C6")
    return {"main": [
        2 * eta * eta * K / (B * B) * (M**4 * C4 * d * d + G**4),
        3000 * eta**3 * K / B**4 * (M**6 * C6 * d**6 + G**6 * d**3) * (1 + mp.log(B)) ** 2,
    ]}


def ccsgld_traj_kl(p):
    eta, K, B, M, G, d = _m(p, "eta", "K", "B", "M", "G", "d")
    C4, C6 = _m({"C4": p.get("C4", 1.0), "C6": p.get("C6", 1.0)}, "C4", "C6")
    big = M**6 * C6 * d**6 + G**6 * d**3
    return {"main": [
        8 * eta * eta * K / B**3 * (M**4 * C4 * d * d + G**4),
        96 * eta**3 * K / B**3 * (M**6 * C6 * d**3 + G**6),
        3200 * eta**5 * K / B**3 * big,
        1875 * eta**3 * K * (1 + mp.log(B)) ** 2 / B**4 * big,
    ]}


def rbm_traj_kl(p):
    eta, K, B, M, n, d, sigma = _m(p, "eta", "K", "B", "M", "n", "d", "sigma")
    return {"main": [
        eta * eta * M**4 * n * K / (B * B * sigma**4),
        d * eta**3 * M**6 * n * K * (1 + mp.log(B)) ** 2 / (B**4 * sigma**6),
    ]}


def ccrbm_traj_kl(p):
    eta, K, B, Bp, M, n, d, sigma = _m(p, "eta", "K", "B", "B_prime", "M", "n", "d", "sigma")
    return {"main": [
        eta * eta * M**4 * n * K / (B * B * Bp * sigma**4),
        eta**3 * M**6 * n * K / (B**3 * sigma**6),
        d * eta**3 * M**6 * n * K * (1 + mp.log(B)) ** 2 / (B**4 * sigma**6),
    ]}


ORACLES = {
    "sgld_lsi": sgld_lsi,
    "absgld_lsi": absgld_lsi,
    "sgld_fd_pi": sgld_fd_pi,
    "sgld_traj_kl": sgld_traj_kl,
    "ccsgld_traj_kl": ccsgld_traj_kl,
    "rbm_traj_kl": rbm_traj_kl,
    "ccrbm_traj_kl": ccrbm_traj_kl,
}


def _logu(rng, lo, hi):
    return float(10 ** rng.uniform(lo, hi))


def sample_params(name, rng):
    """One random parameter set inside the bound's step-size domain."""
    p = {
        "K": int(rng.integers(1, 5000)),
        "B": int(rng.integers(1, 64)),
        "M": _logu(rng, -2, 0.5),
        "G": _logu(rng, -2, 0.5),
        "L": _logu(rng, -1, 0.5),
        "d": int(rng.integers(1, 20)),
        "kl0": _logu(rng, -2, 1),
        "lambda_lsi": _logu(rng, -1, 0.5),
        "C2": 1.0 + rng.uniform(0, 2),
        "C4": 3.0 + rng.uniform(0, 2),
        "C6": 15.0 + rng.uniform(0, 5),
    }
    p["C4"] = max(p["C4"], p["C2"])
    p["C6"] = max(p["C6"], p["C4"])
    frac = float(rng.uniform(0.01, 1.0))
    if name == "sgld_lsi":
        p["eta"] = frac * p["lambda_lsi"] / (6 * p["L"] ** 2)
    elif name == "absgld_lsi":
        p["m1"] = _logu(rng, -1, 1)
        p["m2"] = max(p["m1"], _logu(rng, -1, 1))
        p["eta"] = frac * p["lambda_lsi"] ** 2 / (8 * p["L"] * (p["L"] * p["M"] + 128 * p["M"] ** 2))
    elif name == "sgld_fd_pi":
        p["lambda_pi"] = _logu(rng, -1, 0.5)
        p["eta"] = frac / (6 * p["L"])
    elif name in ("rbm_traj_kl", "ccrbm_traj_kl"):
        p["n"] = int(rng.integers(2, 1000))
        p["sigma"] = _logu(rng, -0.5, 0.5)
        p["B_prime"] = int(rng.integers(1, 16))
        p["eta"] = frac * p["B"] * p["sigma"] ** 2 / (40 * p["M"] ** 2 * p["d"])
    else:
        p["eta"] = _logu(rng, -4, -1)
    return p


def agree(value, exact, rtol=1e-12):
    exact = float(exact)
    return abs(value - exact) <= rtol * max(abs(exact), 1e-300)
