//! Dormand–Prince 5(4) pair with its fourth-order continuous extension.

use crate::error::Result;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub const ORDER: u32 = 5;

pub type State = [f64; 2];

/// One attempted step from `x` with size `h`.
pub struct Step {
    pub y: State,
    /// Derivative at the new point; reused as the first stage of the next step.
    pub k7: State,
    /// Embedded error estimate `y₅ - y₄`.
    pub err: State,
    /// Continuous-extension coefficients, one row per component.
    pub dense: [[f64; 5]; 2],
}

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (a, k) in terms {
            acc += a * k[j];
        }
        *o += h * acc;
    }
    out
}

pub fn step<F>(f: &mut F, x: f64, y: &State, k1: &State, h: f64) -> Result<Step>
where
    F: FnMut(f64, &State) -> Result<State>,
{
    let k2 = f(x + C2 * h, &axpy(y, &[(A21, k1)], h))?;
    let k3 = f(x + C3 * h, &axpy(y, &[(A31, k1), (A32, &k2)], h))?;
    let k4 = f(x + C4 * h, &axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h))?;
    let k5 = f(
        x + C5 * h,
        &axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
    )?;
    let k6 = f(
        x + h,
        &axpy(y, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
    )?;
    let y_new = axpy(
        y,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        h,
    );
    let k7 = f(x + h, &y_new)?;

    let mut err = [0.0; 2];
    let mut dense = [[0.0; 5]; 2];
    for j in 0..2 {
        err[j] = h
            * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j]);
        let dy = y_new[j] - y[j];
        let bspl = h * k1[j] - dy;
        dense[j] = [
            y[j],
            dy,
            bspl,
            dy - h * k7[j] - bspl,
            h * (D1 * k1[j] + D3 * k3[j] + D4 * k4[j] + D5 * k5[j] + D6 * k6[j] + D7 * k7[j]),
        ];
    }
    Ok(Step {
        y: y_new,
        k7,
        err,
        dense,
    })
}

/// Evaluates the continuous extension at `theta ∈ [0, 1]`.
pub fn dense_value(r: &[f64; 5], theta: f64) -> f64 {
    let t1 = 1.0 - theta;
    r[0] + theta * (r[1] + t1 * (r[2] + theta * (r[3] + t1 * r[4])))
}

/// Scaled RMS norm used for step acceptance.
pub fn error_norm(err: &State, y0: &State, y1: &State, rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..2 {
        let sc = atol + rtol * y0[j].abs().max(y1[j].abs());
        let r = err[j] / sc;
        acc += r * r;
    }
    let e = (acc / 2.0).sqrt();
    if e.is_finite() {
        e
    } else {
        f64::INFINITY
    }
}

/// Starting step size estimate (Hairer, Nørsett & Wanner, II.4).
pub fn initial_step<F>(
    f: &mut F,
    x: f64,
    y: &State,
    k1: &State,
    rtol: f64,
    atol: f64,
    h_max: f64,
) -> Result<f64>
where
    F: FnMut(f64, &State) -> Result<State>,
{
    let sc = |j: usize| atol + rtol * y[j].abs();
    let norm = |v: &State| ((0..2).map(|j| (v[j] / sc(j)).powi(2)).sum::<f64>() / 2.0).sqrt();
    let d0 = norm(y);
    let d1 = norm(k1);
    let mut h0 = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(h_max);
    let y1 = axpy(y, &[(1.0, k1)], h0);
    let k2 = f(x + h0, &y1)?;
    let diff = [k2[0] - k1[0], k2[1] - k1[1]];
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / f64::from(ORDER))
    };
    Ok((100.0 * h0).min(h1).min(h_max))
}

/// Integrates with `n` equal steps; used to qualify the order of the pair.
pub fn fixed_steps<F>(mut f: F, x0: f64, y0: State, x1: f64, n: usize) -> Result<State>
where
    F: FnMut(f64, &State) -> Result<State>,
{
    let h = (x1 - x0) / n as f64;
    let mut y = y0;
    let mut k1 = f(x0, &y)?;
    for i in 0..n {
        let x = x0 + i as f64 * h;
        let s = step(&mut f, x, &y, &k1, h)?;
        y = s.y;
        k1 = s.k7;
    }
    Ok(y)
}
