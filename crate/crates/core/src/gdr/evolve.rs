use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use super::GdrError;
use crate::moyal::{CoefficientField, MoyalOperator, PhaseSpaceGrid};

/// Default Courant factor for the explicit stability bound.
pub const DEFAULT_COURANT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("rk4")
    }
}

impl FromStr for Integrator {
    type Err = GdrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rk4" => Ok(Integrator::Rk4),
            other => Err(GdrError::UnknownIntegrator(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub method: Integrator,
    /// Store a snapshot every `stride` steps (the final state is always stored).
    pub stride: usize,
    pub courant: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: Integrator::Rk4,
            stride: usize::MAX,
            courant: DEFAULT_COURANT,
        }
    }
}

/// Snapshots of an evolution on one grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: PhaseSpaceGrid,
    pub times: Vec<f64>,
    pub fields: Vec<CoefficientField>,
    pub integrator_name: String,
    /// Step actually used (the requested step shrunk to divide `t_end` evenly).
    pub dt: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &CoefficientField {
        self.fields.last().expect("a trajectory holds at least the initial field")
    }
}

/// Workspace for repeated RK4 steps on one grid shape.
pub struct Rk4Stepper {
    k: [Array2<f64>; 4],
    stage: Array2<f64>,
    scratch: Array2<f64>,
}

impl Rk4Stepper {
    pub fn new(shape: (usize, usize)) -> Self {
        let z = || Array2::zeros(shape);
        Self {
            k: [z(), z(), z(), z()],
            stage: z(),
            scratch: z(),
        }
    }

    /// Advances `w` by one classical Runge–Kutta step.
    pub fn step(&mut self, op: &MoyalOperator, w: &mut Array2<f64>, dt: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        op.apply_into(w, k1, &mut self.scratch);
        self.stage.assign(w);
        self.stage.scaled_add(0.5 * dt, k1);
        op.apply_into(&self.stage, k2, &mut self.scratch);
        self.stage.assign(w);
        self.stage.scaled_add(0.5 * dt, k2);
        op.apply_into(&self.stage, k3, &mut self.scratch);
        self.stage.assign(w);
        self.stage.scaled_add(dt, k3);
        op.apply_into(&self.stage, k4, &mut self.scratch);
        ndarray::Zip::from(w)
            .and(&*k1)
            .and(&*k2)
            .and(&*k3)
            .and(&*k4)
            .for_each(|w, a, b, c, d| *w += dt / 6.0 * (a + 2.0 * (b + c) + d));
    }
}

/// Integrates `∂_t W = op W` from `initial.time` over `t_end`.
///
/// The step is checked against `op.stable_dt(courant)` and then reduced so
/// that a whole number of steps lands on `t_end`.
pub fn evolve(
    op: &MoyalOperator,
    initial: &CoefficientField,
    t_end: f64,
    dt: f64,
    options: &EvolveOptions,
) -> Result<Trajectory, GdrError> {
    if initial.grid != *op.grid() {
        return Err(GdrError::GridMismatch);
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(GdrError::InvalidArgument(format!("t_end must be finite and nonnegative, got {t_end}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(GdrError::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let limit = op.stable_dt(options.courant);
    if dt > limit {
        return Err(GdrError::Unstable { dt, suggested: limit });
    }
    let steps = if t_end == 0.0 {
        0
    } else {
        (t_end / dt - 1e-9).ceil().max(1.0) as usize
    };
    let h = if steps == 0 { dt } else { t_end / steps as f64 };
    let stride = options.stride.max(1);
    let t0 = initial.time;

    let mut w = initial.data.clone();
    let mut stepper = Rk4Stepper::new(w.dim());
    let mut times = vec![t0];
    let mut fields = vec![initial.clone()];
    for n in 1..=steps {
        stepper.step(op, &mut w, h);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(GdrError::NonFinite { step: n });
        }
        if n % stride == 0 || n == steps {
            let t = t0 + n as f64 * h;
            times.push(t);
            fields.push(CoefficientField {
                grid: initial.grid.clone(),
                data: w.clone(),
                time: t,
            });
        }
    }
    Ok(Trajectory {
        grid: initial.grid.clone(),
        times,
        fields,
        integrator_name: options.method.to_string(),
        dt: h,
        steps,
    })
}
