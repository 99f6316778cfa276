//! Bessel functions of the first kind, integer order.
//!
//! All orders `0..=n_max` for one argument come out of a single backward
//! (Miller) recurrence normalized by `J_0 + 2 Σ J_{2k} = 1`.

const RESCALE_ABOVE: f64 = 1e250;

/// `J_0(z) ..= J_{n_max}(z)`.
pub fn bessel_j_orders(n_max: usize, z: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let az = z.abs();

    // Start well above both the requested order and the turning point
    // n ≈ z, past which J_n decays super-exponentially.
    let top = (n_max as f64).max(az);
    let mut m = (top + 30.0 + 12.0 * top.sqrt()).ceil() as usize;
    m += m % 2;

    let two_over_z = 2.0 / az;
    let mut j_next = 0.0; // J_{n+1}
    let mut j_cur = 1e-300; // J_n, starting at n = m
    let mut norm = 0.0;
    for n in (1..=m).rev() {
        // J_{n-1} = (2n/z) J_n - J_{n+1}
        let j_prev = n as f64 * two_over_z * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        let order = n - 1;
        if order <= n_max {
            out[order] = j_cur;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            j_cur *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut().skip(order) {
                *v *= s;
            }
        }
    }
    norm += j_cur;

    let inv = 1.0 / norm;
    for (n, v) in out.iter_mut().enumerate() {
        *v *= inv;
        if z < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `J_n(z)` for any integer `n`, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(n: i64, z: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let v = bessel_j_orders(order, z)[order];
    if n < 0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Table of `J_l(z)` for `l in -band..=band`, indexed by `l + band`.
pub fn bessel_j_band(band: usize, z: f64) -> Vec<f64> {
    let pos = bessel_j_orders(band, z);
    let mut out = Vec::with_capacity(2 * band + 1);
    for l in (1..=band).rev() {
        out.push(if l % 2 == 1 { -pos[l] } else { pos[l] });
    }
    out.extend_from_slice(&pos);
    out
}
