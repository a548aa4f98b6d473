//! Iteration-theoretic computations for the polynomial f: Green function
//! of the filled Julia set, periodic cycles and multipliers, Koenigs
//! linearization, and backward orbits along repelling cycles.

mod backward;
mod cycles;
mod green;
mod koenigs;

pub use backward::{
    backward_orbit, principal_root_orbit, small_poly_roots_with_constant, BackwardOrbit,
};
pub use cycles::{
    classify_multiplier, iterate, periodic_cycles, CycleRecord, IterateOutcome, StabilityClass,
};
pub use green::{escape_radius, green, green_hp, green_hp_float, GreenEvaluation};
pub use koenigs::{cycle_return_series, koenigs, koenigs_of_series, polish_periodic_point};

use crate::error::{Error, Result};
use crate::germ::PolynomialGerm;
use num_complex::Complex64;

/// Shift an affine polynomial p(z) = c_0 + c_1 z + ... to an
/// origin-fixing representative: pick a fixed point z* of p and return
/// (g, z*) with g(xi) = p(xi + z*) - z*, so that Green values transport
/// as g_p(z) = g_g(z - z*).
pub fn shift_to_fixed_point(constant_first: &[Complex64]) -> Result<(PolynomialGerm, Complex64)> {
    if constant_first.len() < 2 {
        return Err(Error::DegreeTooSmall {
            needed: 1,
            got: constant_first.len().saturating_sub(1),
        });
    }
    if constant_first[0].norm() == 0.0 {
        let germ = PolynomialGerm::new(
            constant_first[1..]
                .iter()
                .map(|c| crate::num::from_c64(53, *c))
                .collect(),
        )?;
        return Ok((germ, Complex64::new(0.0, 0.0)));
    }
    let mut fixed_eq = constant_first.to_vec();
    fixed_eq[1] -= Complex64::new(1.0, 0.0);
    let roots = small_poly_roots_with_constant(&fixed_eq);
    let z_star = roots
        .into_iter()
        .filter(|z| z.is_finite())
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or_else(|| Error::NonConvergence("no finite fixed point".into()))?;
    // Binomial shift: g coefficients in xi from p coefficients in z.
    let deg = constant_first.len() - 1;
    let mut shifted = vec![Complex64::new(0.0, 0.0); deg + 1];
    for (j, cj) in constant_first.iter().enumerate() {
        let mut binom = 1.0f64;
        #[allow(clippy::needless_range_loop)]
        for k in 0..=j {
            shifted[k] += cj * binom * z_star.powu((j - k) as u32);
            binom *= (j - k) as f64 / (k + 1) as f64;
        }
    }
    shifted[0] -= z_star;
    debug_assert!(shifted[0].norm() < 1e-9 * (1.0 + z_star.norm()));
    let germ = PolynomialGerm::new(
        shifted[1..]
            .iter()
            .map(|c| crate::num::from_c64(53, *c))
            .collect(),
    )?;
    Ok((germ, z_star))
}
