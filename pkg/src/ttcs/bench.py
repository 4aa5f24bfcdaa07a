"""Benchmark the compiled curve core against the pure-Python fallback."""

from __future__ import annotations

import time

from .curve import params, pure


def _time(fn, n):
    t0 = time.perf_counter()
    for _ in range(n):
        fn()
    return (time.perf_counter() - t0) / n


def _bench_backend(mod, reps):
    g1 = params.G1_GEN
    g2 = params.G2_GEN
    k = params.R - 12345
    e = mod.pairing(g1, g2)
    out = {
        "g1_mul": _time(lambda: mod.g1_mul(g1, k), reps * 10),
        "g2_mul": _time(lambda: mod.g2_mul(g2, k), max(1, reps // 2)),
        "pairing": _time(lambda: mod.pairing(g1, g2), reps),
        "gt_pow": _time(lambda: mod.gt_pow(e, k), reps),
    }
    return out


def _bench_protocol(reps):
    from . import daa
    from .primitives import hash as H

    gpk1 = daa.setup1(128)
    _, isk = daa.setup2(gpk1, epoch="bench")
    pk = isk.pk
    sk = 123456789
    cred = daa.issue(isk, daa.join(pk, sk, b"bench-nonce"))
    digest = H([b"bench message"])
    sig = daa.sign(sk, cred, b"d:2020-01-27:1", digest, pk)
    return {
        "daa_sign": _time(lambda: daa.sign(sk, cred, b"d:2020-01-27:1", digest, pk), reps),
        "daa_verify": _time(lambda: daa.verify(pk, digest, b"d:2020-01-27:1", sig), reps),
    }


def run(reps: int = 10, include_pure: bool = True) -> str:
    from . import curve

    backends = [(curve.BACKEND_NAME, curve.backend)]
    if include_pure and curve.BACKEND_NAME != "pure":
        backends.append(("pure", pure))
    lines = []
    results = {}
    for name, mod in backends:
        results[name] = _bench_backend(mod, reps if name != "pure" else max(1, reps // 5))
    proto = _bench_protocol(reps)
    ops = sorted(results[backends[0][0]])
    header = f"{'operation':<12}" + "".join(f"{name + ' (ms)':>14}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    lines.append(header)
    for op in ops:
        row = f"{op:<12}"
        for name, _ in backends:
            row += f"{results[name][op] * 1e3:>14.3f}"
        if len(backends) == 2:
            row += f"{results['pure'][op] / results[backends[0][0]][op]:>9.1f}x"
        lines.append(row)
    lines.append("")
    lines.append(f"{'daa_sign':<12}{proto['daa_sign'] * 1e3:>14.3f}")
    lines.append(f"{'daa_verify':<12}{proto['daa_verify'] * 1e3:>14.3f}")
    lines.append("")
    lines.append(f"active backend: {curve.BACKEND_NAME}")
    return "\n".join(lines)


def main():
    print(run())


if __name__ == "__main__":
    main()
