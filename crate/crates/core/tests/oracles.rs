//! Reference values computed independently with 50-digit mpmath (direct
//! stencil sums, the literal `ζ` recurrence, dense symmetric eigensolvers)
//! and frozen here.

#![allow(clippy::excessive_precision)]

use rellich_core::factorization::{kernel_solution, zeta_one, RellichRemainder};
use rellich_core::spectral::{best_constant_sweep, conjecture_problem, min_gen_eig, sanity_problem, SolverOptions};
use rellich_core::weights::{rho_k, rho_k_binary64};
use rellich_core::Precision;

fn close(got: f64, want: f64, rel: f64) {
    assert!((got - want).abs() <= rel * want.abs(), "got {got:e}, want {want:e}, rel {:e}", (got - want).abs() / want.abs());
}

#[test]
fn weight_values() {
    let table = [
        (1, 1, 0.5857864376269049512),
        (1, 2, 0.068148347421863426501),
        (2, 2, 0.06574433402356075421),
        (2, 3, 0.0083804171262737267741),
        (3, 3, 0.0092951792659164623134),
        (3, 5, 0.00026772845172391637265),
        (4, 4, 0.0013611647685690295901),
        (4, 10, 4.6917939470933438163e-7),
        (5, 7, 4.3578444230245569765e-6),
        (2, 1000, 5.6250082031402270842e-13),
    ];
    for (k, n, want) in table {
        close(rho_k(k, n).unwrap(), want, 4e-15);
    }
}

#[test]
fn plain_binary64_loses_digits_far_out() {
    // the naive stencil sum cancels about 12 of 16 digits at n = 1000
    let naive = rho_k_binary64(2, 1000).unwrap();
    assert!((naive / 5.6250082031402270842e-13 - 1.0).abs() > 1e-10);
}

#[test]
fn zeta_c_b_values() {
    let rc = RellichRemainder::rellich_coeffs(200).unwrap();
    let table = [
        (1, 6.1175560762781285098, 2.4733693772419291659, 1.6172271059894931315),
        (2, 3.3188321536292879949, 1.8217662181600821404, 1.8367582451346015661),
        (10, 1.3850090315974363321, 1.176864066745788756, 1.9882681078288423794),
        (100, 1.0360931259994093835, 1.0178865978091122227, 1.9998612276957403112),
    ];
    for (n, z, c, b) in table {
        close(rc.zeta_values()[n], z, 2e-16);
        close(rc.c(n).unwrap(), c, 2e-16);
        close(rc.b(n).unwrap(), b, 4e-16);
    }
    close(zeta_one(), 6.1175560762781285098, 2e-16);
}

#[test]
fn kernel_values() {
    let u = kernel_solution(2, 120).unwrap();
    let table = [
        (3, 4.0),
        (4, 10.065744334023560754),
        (10, 173.87246606499523337),
        (50, 24729.815054154133841),
        (100, 209183.74532667728202),
    ];
    for (n, want) in table {
        close(u.get(n), want, 1e-13);
    }
}

#[test]
fn dense_generalized_eigenvalues() {
    let table = [
        (1, 8, 1.6512493734536777749),
        (1, 30, 1.3595318343312138114),
        (2, 8, 14.68010054812386427),
        (2, 30, 6.3448057984087876795),
    ];
    for (k, size, want) in table {
        let (a, w) = sanity_problem(k, size).unwrap();
        close(min_gen_eig(&a, &w, 1e-12).unwrap().lambda_min, want, 1e-11);
    }
}

#[test]
fn conjecture_matrix_eigenvalues() {
    let table = [(3, 10, 0.013169569476341118821), (3, 40, 9.4963369269769165436e-6), (4, 12, 0.003494336228560685575)];
    for (k, size, want) in table {
        let (a, w) = conjecture_problem(k, size).unwrap();
        let got = min_gen_eig(&a, &w, 1e-13).unwrap().lambda_min;
        assert!((got - want).abs() < 1e-12, "k {k} size {size}: {got:e} vs {want:e}");
    }
}

#[test]
fn best_constant_two_by_two() {
    let opts = SolverOptions { tol: 1e-13, precision: Precision::Extended };
    let s = best_constant_sweep(&[1, 2], &opts).unwrap();
    close(s.estimates[0].lambda_min, 5.0, 1e-12);
    close(s.estimates[1].lambda_min, (101.0 - 9305f64.sqrt()) / 2.0, 1e-12);
}
