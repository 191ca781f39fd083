"""Quick check that the extension imports and its main entry points run."""

import math

import splitrx as sx


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    env = sx.NoiseEnv(0.01, 1.0, 1.0)
    cfg = sx.SystemConfig(100.0, 0.5)

    close(sx.exp_e1(1.0), 0.5963473623231941, 1e-12)
    close(sx.bessel_i0_scaled(0.0), 1.0, 0.0)
    close(sx.erfc(0.0), 1.0, 1e-15)

    cd = sx.mi_cd_closed_form(cfg.with_rho(1.0), env)
    close(cd.bits, math.log2(1 + 100 / 1.01), 1e-12)
    close(sx.asymptotic_gain(env), 3.33, 0.005)

    approx = sx.mi_split_approx(cfg, env).bits
    mc = sx.mi_split_mc(cfg, env, n_samples=20_000, seed=1)
    close(mc.bits, approx, 0.1)
    again = sx.mi_split_mc(cfg, env, n_samples=20_000, seed=1)
    assert again.bits == mc.bits

    qam = sx.Constellation.qam(16)
    assert len(qam) == 16
    close(qam.average_energy(), 1.0, 1e-12)
    idx, y1, y2 = sx.simulate(qam, cfg.with_rho(0.8).with_power(60.0), sx.NoiseEnv(0.1, 1.0, 1.0), 200, seed=2)
    fast = sx.detect(y1, y2, qam, cfg.with_rho(0.8).with_power(60.0), sx.NoiseEnv(0.1, 1.0, 1.0))
    ml = sx.detect(y1, y2, qam, cfg.with_rho(0.8).with_power(60.0), sx.NoiseEnv(0.1, 1.0, 1.0), detector="ml")
    assert sum(a == b for a, b in zip(fast, ml)) >= 195
    assert sum(a == b for a, b in zip(idx, ml)) >= 180

    ser = sx.ser_monte_carlo(qam, sx.SystemConfig(60.0, 0.8), sx.NoiseEnv(0.1, 1.0, 1.0), n=20_000, seed=3)
    assert 0.0 <= ser.ser < 0.1 and ser.n_symbols == 20_000
    rho_star, ser_min, curve = sx.ser_optimal_rho(
        sx.Constellation.psk(8), sx.SystemConfig(100.0, 1.0), sx.NoiseEnv(1.0, 1.0, 1.0), rho_grid=[0.6, 0.8, 1.0], n=20_000
    )
    assert rho_star == 1.0 and len(curve) == 3

    try:
        sx.NoiseEnv(-1.0, 1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative variance accepted")

    print(f"splitrx {sx.__version__}: ok ({mc!r}, {ser!r})")


if __name__ == "__main__":
    main()
