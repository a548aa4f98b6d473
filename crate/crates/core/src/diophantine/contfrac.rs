//! Continued-fraction expansion of a high-precision angle.

use rug::Float;

/// Convergents p/q of x in [0,1) with q <= q_max, in increasing q order.
///
/// The expansion stops when the remainder falls below the resolution of
/// the input (a tail smaller than one ulp of x is noise, not arithmetic).
pub fn convergents(x: &Float, q_max: u64) -> Vec<(u64, u64)> {
    let prec = x.prec();
    let resolution = Float::with_val(prec, Float::i_exp(1, -(prec as i32 - 4)));
    let mut out = Vec::new();
    let mut frac = x.clone().fract().abs();

    // p/q recurrences: p_k = a_k p_{k-1} + p_{k-2}, same for q.
    let (mut p_prev, mut q_prev): (u64, u64) = (1, 0);
    let (mut p_cur, mut q_cur): (u64, u64) = (0, 1);

    for _ in 0..128 {
        if frac < resolution {
            break;
        }
        let inv = Float::with_val(prec, frac.recip_ref());
        let a_f = inv.clone().floor();
        let Some(a) = a_f.to_integer().and_then(|i| i.to_u64()) else {
            break;
        };
        if a == 0 {
            break;
        }
        let p_next = match a.checked_mul(p_cur).and_then(|v| v.checked_add(p_prev)) {
            Some(v) => v,
            None => break,
        };
        let q_next = match a.checked_mul(q_cur).and_then(|v| v.checked_add(q_prev)) {
            Some(v) => v,
            None => break,
        };
        if q_next > q_max {
            break;
        }
        out.push((p_next, q_next));
        p_prev = p_cur;
        q_prev = q_cur;
        p_cur = p_next;
        q_cur = q_next;
        frac = inv - a_f;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_has_fibonacci_convergents() {
        let mut x = Float::with_val(256, 5).sqrt();
        x -= 1;
        x /= 2;
        let cs = convergents(&x, 100);
        let qs: Vec<u64> = cs.iter().map(|&(_, q)| q).collect();
        assert_eq!(&qs[..9], &[1, 2, 3, 5, 8, 13, 21, 34, 55]);
    }

    #[test]
    fn rational_terminates() {
        let x = Float::with_val(128, 3.0) / 7u32;
        let cs = convergents(&x, 1000);
        assert!(cs.iter().any(|&(p, q)| p == 3 && q == 7));
    }
}
