//! Adaptive Dormand-Prince 5(4) integrator over fixed-size real states.

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

/// How the per-step error estimate is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    /// Each component against its own magnitude.
    Componentwise,
    /// Every component against the largest magnitude in the state. Suited to
    /// linear problems where only the dominant solution matters.
    Global,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    pub norm: ErrorNorm,
}

impl Options {
    pub fn new(tol: f64) -> Self {
        Options {
            rtol: tol,
            atol: tol,
            h_init: None,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
            norm: ErrorNorm::Componentwise,
        }
    }

    pub fn global(mut self) -> Self {
        self.norm = ErrorNorm::Global;
        self
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Completed,
    Stopped,
    StepUnderflow,
    NonFinite,
    MaxSteps,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub status: Status,
    pub steps: usize,
    pub rejected: usize,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// One Dormand-Prince step of size `h` from `(t, y)` with `k1 = f(t, y)`.
///
/// Returns the fifth-order solution, the embedded error vector and
/// `f(t + h, y_new)` (first stage of the next step).
pub fn step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, err, k7)
}

fn error_norm<const N: usize>(opts: &Options, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
    match opts.norm {
        ErrorNorm::Componentwise => {
            let mut acc = 0.0;
            for i in 0..N {
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                acc += (err[i] / sc).powi(2);
            }
            (acc / N as f64).sqrt()
        }
        ErrorNorm::Global => {
            let big = y.iter().chain(y_new.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
            let sc = opts.atol + opts.rtol * big;
            let mut acc = 0.0;
            for e in err {
                acc += (e / sc).powi(2);
            }
            (acc / N as f64).sqrt()
        }
    }
}

fn initial_step<const N: usize, F>(f: &F, t0: f64, y0: &[f64; N], k1: &[f64; N], opts: &Options, span: f64) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let scale: Vec<f64> = match opts.norm {
        ErrorNorm::Componentwise => y0.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect(),
        ErrorNorm::Global => {
            let big = y0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            vec![opts.atol + opts.rtol * big; N]
        }
    };
    let d0 = (y0.iter().zip(&scale).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d1 = (k1.iter().zip(&scale).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span.abs());
    let dir = span.signum();
    let y1 = axpy(y0, dir * h0, &[(1.0, k1)]);
    let k2 = f(t0 + dir * h0, &y1);
    let d2 =
        (k2.iter().zip(k1).zip(&scale).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>() / N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span.abs()).min(opts.h_max).max(opts.h_min * (1.0 + t0.abs()))
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// After every accepted step the observer sees `(t_prev, y_prev, t, y)` and
/// may rescale `y` in place or stop the integration.
pub fn integrate<const N: usize, F, O>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &Options,
    mut observer: O,
) -> Outcome<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N], f64, &mut [f64; N]) -> Control,
{
    let span = t1 - t0;
    let mut out = Outcome { t: t0, y: y0, status: Status::Completed, steps: 0, rejected: 0 };
    if span == 0.0 {
        return out;
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    if k1.iter().any(|v| !v.is_finite()) {
        out.status = Status::NonFinite;
        return out;
    }
    let mut h = opts.h_init.unwrap_or_else(|| initial_step(&f, t0, &y0, &k1, opts, span)).abs();
    let mut prev_factor_limit = 5.0;
    loop {
        if out.steps >= opts.max_steps {
            out.status = Status::MaxSteps;
            break;
        }
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        h = h.min(opts.h_max);
        let (y_new, err, k7) = step(&f, t, &y, &k1, dir * h);
        let en = error_norm(opts, &y, &y_new, &err);
        let finite = en.is_finite() && y_new.iter().all(|v| v.is_finite());
        if finite && en <= 1.0 {
            let t_prev = t;
            let y_prev = y;
            t = if last { t1 } else { t + dir * h };
            y = y_new;
            k1 = k7;
            out.steps += 1;
            let before = y;
            let ctl = observer(t_prev, &y_prev, t, &mut y);
            if y != before {
                k1 = f(t, &y);
            }
            if ctl == Control::Stop {
                out.status = Status::Stopped;
                break;
            }
            if k1.iter().any(|v| !v.is_finite()) {
                out.status = Status::NonFinite;
                break;
            }
            let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, prev_factor_limit) };
            prev_factor_limit = 5.0;
            h *= factor;
        } else {
            out.rejected += 1;
            let factor = if finite { (0.9 * en.powf(-0.2)).clamp(0.1, 1.0) } else { 0.25 };
            h *= factor;
            prev_factor_limit = 1.0;
            if h < opts.h_min * (1.0 + t.abs()) {
                out.status = if finite { Status::StepUnderflow } else { Status::NonFinite };
                break;
            }
        }
    }
    out.t = t;
    out.y = y;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let out =
            integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, &Options::new(1e-12), |_, _, _, _| Control::Continue);
        assert_eq!(out.status, Status::Completed);
        assert!((out.y[0] - (-5.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_backwards() {
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let out = integrate(f, 0.0, [1.0, 0.0], -10.0, &Options::new(1e-12), |_, _, _, _| Control::Continue);
        assert_eq!(out.t, -10.0);
        assert!((out.y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((out.y[1] - 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn observer_can_stop_and_rescale() {
        let f = |_: f64, y: &[f64; 1]| [y[0]];
        let mut seen = 0;
        let out = integrate(f, 0.0, [1.0], 10.0, &Options::new(1e-10), |_, _, t, y| {
            seen += 1;
            if y[0] > 100.0 {
                y[0] *= 0.01;
            }
            if t > 5.0 {
                Control::Stop
            } else {
                Control::Continue
            }
        });
        assert_eq!(out.status, Status::Stopped);
        assert!(seen > 0);
        assert!(out.y[0] < 100.0);
    }

    #[test]
    fn blow_up_detected() {
        // y' = y^2 blows up at t = 1.
        let out = integrate(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            &Options::new(1e-10),
            |_, _, _, _| Control::Continue,
        );
        assert!(matches!(out.status, Status::StepUnderflow | Status::NonFinite));
        assert!(out.t < 1.0 && out.t > 0.99);
    }

    #[test]
    fn single_step_order() {
        let f = |_: f64, y: &[f64; 1]| [y[0]];
        let k1 = f(0.0, &[1.0]);
        let (a, _, _) = step(&f, 0.0, &[1.0], &k1, 0.1);
        let (b, _, _) = step(&f, 0.0, &[1.0], &k1, 0.05);
        let ea = (a[0] - 0.1f64.exp()).abs();
        let eb = (b[0] - 0.05f64.exp()).abs();
        // Local error is O(h^6).
        assert!(ea / eb > 40.0, "{ea} {eb}");
    }
}
