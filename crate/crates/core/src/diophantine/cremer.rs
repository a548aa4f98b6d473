//! Construction of Cremer-type angles: multipliers whose small divisors
//! collapse fast enough that the liminf condition is witnessed at
//! certified indices.
//!
//! The angle is a dyadic sum theta = 2^{-a1} + 2^{-T}: the base term
//! pins the near-resonant order 2^{a1}, and one deep tail exponent T
//! drives |1 - tau^l| down at every index l = k * 2^{a1}. Each extra
//! certified index multiplies the required tail by about d^{l}, so T
//! grows doubly exponentially in the index ladder and the bit cap is
//! what bounds the reachable depth. All certification runs on exact
//! dyadic rationals and integer exponents; the tail is never expanded
//! into a mantissa.

use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::dist_to_int_rational;

use super::{Angle, Multiplier};

const BASE_EXPONENT: u64 = 2;
const STEP_NATS: f64 = 100.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CremerCertificate {
    /// Certified index l (a multiple of 2^{a1}).
    pub index: u64,
    /// Certified upper bound on L(l) = l ln A + ln|1-tau^l|/(d^l - 1),
    /// via the chord bound |1 - e^{2 pi i x}| <= 2 pi dist(x, Z).
    pub l_bound: f64,
    /// The bound this step had to clear: -k * 100 nats.
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CremerAngle {
    #[serde(serialize_with = "serialize_multiplier")]
    pub multiplier: Multiplier,
    pub base_exponent: u64,
    pub tail_exponent: u64,
    pub degree: u64,
    pub growth_base: f64,
    pub certificates: Vec<CremerCertificate>,
}

fn serialize_multiplier<S: serde::Serializer>(
    m: &Multiplier,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&m.describe())
}

impl CremerAngle {
    /// Largest certified index; condition_ii scans up to here.
    pub fn ell_max(&self) -> u64 {
        self.certificates.last().map(|c| c.index).unwrap_or(0)
    }
}

/// Construct a Cremer-type angle for the degree-d family, certified for
/// the growth base A at `depth` indices.
pub fn cremer_angle(degree: u64, depth: u32, base_a: f64, bit_cap: u64) -> Result<CremerAngle> {
    if degree < 2 {
        return Err(Error::DegreeTooSmall {
            needed: 2,
            got: degree as usize,
        });
    }
    if depth < 1 {
        return Err(Error::Precondition(
            "cremer_angle needs depth >= 1 (no certificate otherwise)".into(),
        ));
    }
    if !(base_a.is_finite() && base_a > 1.0) {
        return Err(Error::Precondition(format!(
            "growth base must exceed 1, got {base_a}"
        )));
    }

    // A bare partial sum 2^{-a1} is a resonant tail (tau would be an
    // exact root of unity of order 2^{a1}); the tail term below is what
    // makes every certified index non-resonant.
    let base_index = 1u64 << BASE_EXPONENT;
    let ln_a = base_a.ln();
    let ln2 = std::f64::consts::LN_2;

    // Least tail exponent clearing every threshold: at l = k * 2^{a1},
    // dist(l theta, Z) = l * 2^{-T}, so
    //   L(l) <= l ln A + (ln(2 pi l) - T ln 2)/(d^l - 1) < -k * 100.
    let mut t_req: f64 = (BASE_EXPONENT + 2) as f64;
    for k in 1..=depth as u64 {
        let ell = base_index * k;
        let ell_f = ell as f64;
        let dl_minus_1 = (degree as f64).powf(ell_f) - 1.0;
        if !dl_minus_1.is_finite() {
            return Err(Error::BitCapExceeded {
                required: u64::MAX,
                cap: bit_cap,
            });
        }
        let need =
            ((2.0 * std::f64::consts::PI * ell_f).ln() + dl_minus_1 * (k as f64 * STEP_NATS + ell_f * ln_a))
                / ln2;
        t_req = t_req.max(need);
    }
    let tail = t_req.ceil() as u64 + 8;
    if tail > bit_cap {
        return Err(Error::BitCapExceeded {
            required: tail,
            cap: bit_cap,
        });
    }

    let angle = Angle::DyadicSum {
        exponents: vec![BASE_EXPONENT, tail],
    };

    // Certify each index against the exact dyadic distance.
    let theta = angle.as_rational().expect("dyadic sum is rational");
    let mut certificates = Vec::new();
    for k in 1..=depth as u64 {
        let ell = base_index * k;
        let dist = dist_to_int_rational(&(theta.clone() * Rational::from(ell)));
        // dist(l theta, Z) = l * 2^{-tail} exactly for these indices.
        let expect = Rational::from(ell) / (Rational::from(1) << tail as u32);
        debug_assert_eq!(dist, expect);
        if dist.cmp0() == std::cmp::Ordering::Equal {
            return Err(Error::Precondition(format!(
                "resonant tail at certified index {ell}"
            )));
        }
        let ell_f = ell as f64;
        let ln_dist = ell_f.ln() - tail as f64 * ln2;
        let ln_chord = (2.0 * std::f64::consts::PI).ln() + ln_dist;
        let dl_minus_1 = (degree as f64).powf(ell_f) - 1.0;
        let l_bound = ell_f * ln_a + ln_chord / dl_minus_1;
        let threshold = -(k as f64) * STEP_NATS;
        if l_bound >= threshold {
            return Err(Error::NonConvergence(format!(
                "certificate at index {ell} missed: bound {l_bound} vs threshold {threshold}"
            )));
        }
        certificates.push(CremerCertificate {
            index: ell,
            l_bound,
            threshold,
        });
    }

    Ok(CremerAngle {
        multiplier: Multiplier::Circle(angle),
        base_exponent: BASE_EXPONENT,
        tail_exponent: tail,
        degree,
        growth_base: base_a,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;
    use crate::diophantine::{condition_i, condition_ii, detect_resonance, LiminfTrend};

    #[test]
    fn depth_zero_is_refused() {
        assert!(matches!(
            cremer_angle(2, 0, 2.0, 1 << 26),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn depth_one_certificate_is_nonempty_and_deep() {
        let c = cremer_angle(2, 1, 2.0, 1 << 26).unwrap();
        assert_eq!(c.certificates.len(), 1);
        assert!(c.certificates[0].l_bound < -100.0);
        assert_eq!(c.certificates[0].index, 4);
    }

    #[test]
    fn excessive_depth_hits_bit_cap() {
        match cremer_angle(2, 6, 2.0, 1 << 26) {
            Err(Error::BitCapExceeded { cap, .. }) => assert_eq!(cap, 1 << 26),
            other => panic!("expected bit cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn output_is_operationally_irrational() {
        let c = cremer_angle(2, 3, 2.0, 1 << 26).unwrap();
        let tols = Tolerances::for_precision(1024);
        assert!(detect_resonance(&c.multiplier, 1_000_000, &tols).is_none());
    }

    #[test]
    fn conditions_split_as_certified() {
        // The two Corollary conditions are mutually exclusive verdicts on
        // the same multiplier: the constructed angle fails (i) and its
        // liminf trends to minus infinity with minima at exactly the
        // certified indices.
        let c = cremer_angle(2, 3, 2.0, 1 << 26).unwrap();
        let tols = Tolerances::for_precision(1024);
        let ci = condition_i(&c.multiplier, 10_000).unwrap();
        assert!(!ci.stable, "ladder: {:?}", ci.ladder);

        let cii = condition_ii(&c.multiplier, 2, &[2.0], c.ell_max(), &tols).unwrap();
        assert_eq!(cii.verdict, LiminfTrend::TrendingToMinusInfinity);
        let scan = &cii.scans[0];
        let cert_indices: Vec<u64> = c.certificates.iter().map(|x| x.index).collect();
        assert_eq!(scan.witnesses, cert_indices);
        for cert in &c.certificates {
            let l = scan.l_values[(cert.index - 1) as usize];
            assert!(
                l <= cert.l_bound + 1e-6,
                "honest L {l} vs certified bound {}",
                cert.l_bound
            );
            assert!(l < cert.threshold);
        }
        // Local minima of the scan occur at exactly the certified indices.
        let minima: Vec<u64> = (1..scan.l_values.len() - 1)
            .filter(|&i| {
                scan.l_values[i] < scan.l_values[i - 1] && scan.l_values[i] < scan.l_values[i + 1]
            })
            .map(|i| i as u64 + 1)
            .chain(
                // endpoint minimum
                (scan.l_values.len() >= 2
                    && scan.l_values[scan.l_values.len() - 1]
                        < scan.l_values[scan.l_values.len() - 2])
                    .then_some(scan.l_values.len() as u64),
            )
            .collect();
        assert_eq!(minima, cert_indices);
    }
}
