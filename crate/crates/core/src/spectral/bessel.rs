//! Normalized Bessel profiles `Λ_μ(t) = Γ(μ+1) (2/t)^μ J_μ(t)`.
//!
//! `Λ_{m/2-1}(2π|x|)` is the Fourier transform of the normalized surface
//! measure of the unit sphere in `R^m`; `Λ_μ(0) = 1` for every order.
//! Orders are integers or half-integers, passed as `twice_mu = 2μ ≥ -1`.

const SERIES_MAX: f64 = 4.0;
const BIG: f64 = 1e250;

/// `Λ_μ(t)` for `μ = twice_mu / 2`.
pub fn lambda(twice_mu: i32, t: f64) -> f64 {
    assert!(twice_mu >= -1, "order must be at least -1/2");
    let t = t.abs();
    if twice_mu == -1 {
        return t.cos();
    }
    if t < SERIES_MAX {
        return series(0.5 * twice_mu as f64, t);
    }
    if twice_mu % 2 == 0 {
        let n = (twice_mu / 2) as usize;
        let mut pref = 1.0;
        for k in 1..=n {
            pref *= k as f64 * 2.0 / t;
        }
        pref * bessel_j(n, t)
    } else {
        let l = ((twice_mu - 1) / 2) as usize;
        let mut pref = 1.0;
        for k in 0..l {
            pref *= (2 * k + 3) as f64 / t;
        }
        pref * spherical_j(l, t)
    }
}

/// `t ↦ Λ_μ(t)` and its first two derivatives, using `Λ_μ' = -t/(2(μ+1)) Λ_{μ+1}`.
pub fn lambda_with_derivatives(twice_mu: i32, t: f64) -> (f64, f64, f64) {
    let mu = 0.5 * twice_mu as f64;
    let l0 = lambda(twice_mu, t);
    let l1 = lambda(twice_mu + 2, t);
    let l2 = lambda(twice_mu + 4, t);
    let d1 = -t / (2.0 * (mu + 1.0)) * l1;
    let d2 = -l1 / (2.0 * (mu + 1.0)) + t * t / (4.0 * (mu + 1.0) * (mu + 2.0)) * l2;
    (l0, d1, d2)
}

fn series(mu: f64, t: f64) -> f64 {
    let q = -0.25 * t * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let k = k as f64;
        term *= q / (k * (mu + k));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn start_index(order: usize, t: f64) -> usize {
    let top = (order as f64).max(t);
    let m = top + 30.0 + (80.0 * top).sqrt();
    2 * ((m as usize).div_ceil(2))
}

/// Integer-order `J_n(t)`, `t ≥ 4`, by Miller's backward recurrence
/// normalized with `J_0 + 2 Σ J_{2k} = 1`.
fn bessel_j(n: usize, t: f64) -> f64 {
    let m = start_index(n, t);
    let tox = 2.0 / t;
    let (mut bjp, mut bj) = (0.0f64, 1.0f64);
    let (mut sum, mut ans) = (0.0f64, 0.0f64);
    let mut jsum = false;
    for j in (1..=m).rev() {
        let bjm = j as f64 * tox * bj - bjp;
        bjp = bj;
        bj = bjm;
        if bj.abs() > BIG {
            bj /= BIG;
            bjp /= BIG;
            ans /= BIG;
            sum /= BIG;
        }
        if jsum {
            sum += bj;
        }
        jsum = !jsum;
        if j == n + 1 {
            ans = bj;
        }
    }
    if n == 0 {
        ans = bj;
    }
    ans / (2.0 * sum - bj)
}

/// Spherical `j_l(t)`, `t ≥ 4`, by backward recurrence normalized against
/// whichever of the closed forms `j_0`, `j_1` is better conditioned.
fn spherical_j(l: usize, t: f64) -> f64 {
    let m = start_index(l, t);
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let mut want = 0.0;
    let mut f1 = 0.0;
    for k in (1..=m).rev() {
        let prev = (2 * k + 1) as f64 / t * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > BIG {
            cur /= BIG;
            next /= BIG;
            want /= BIG;
        }
        // `cur` now holds j_{k-1}
        if k - 1 == l {
            want = cur;
        }
        if k == 1 {
            f1 = next;
        }
    }
    let (s, c) = t.sin_cos();
    let j0 = s / t;
    let j1 = s / (t * t) - c / t;
    if j0.abs() >= j1.abs() {
        want * j0 / cur
    } else {
        want * j1 / f1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        for &t in &[0.0, 0.3, 3.9, 4.1, 7.5, 31.0, 250.0] {
            let tt: f64 = t;
            let sinc = if tt == 0.0 { 1.0 } else { tt.sin() / tt };
            assert!((lambda(1, t) - sinc).abs() < 1e-14, "t={t}");
            if tt > 0.0 {
                let l3 = 3.0 * (tt.sin() / tt.powi(3) - tt.cos() / (tt * tt));
                assert!((lambda(3, t) - l3).abs() < 1e-13, "t={t} {} {}", lambda(3, t), l3);
            }
        }
    }

    #[test]
    fn bessel_reference_values() {
        // J0(π) and the first zero of J0.
        assert!((lambda(0, std::f64::consts::PI) + 0.304_242_177_644_093_9).abs() < 1e-14);
        assert!(lambda(0, 2.404_825_557_695_773).abs() < 1e-14);
        // J1(10) = 0.04347274616886144, Λ_1(t) = 2 J1(t)/t
        assert!((lambda(2, 10.0) - 2.0 * 0.043_472_746_168_861_44 / 10.0).abs() < 1e-15);
        // J0(100) = 0.019985850304223122
        assert!((lambda(0, 100.0) - 0.019_985_850_304_223_122).abs() < 1e-14);
    }

    #[test]
    fn series_and_recurrence_agree_at_switch() {
        for twice_mu in 0..8 {
            for t in [SERIES_MAX, 4.5, 6.0] {
                let a = series(0.5 * twice_mu as f64, t);
                let b = lambda(twice_mu, t);
                assert!((a - b).abs() < 1e-13, "order {twice_mu} at {t}: {a} vs {b}");
            }
        }
    }
}
