//! Sampled potential, grid geometry and boundary conventions. All
//! index <-> time bookkeeping lives here.

use crate::error::{Result, ZsError};
use crate::{Kappa, C64};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Relative tolerance for deciding that T1, T2 are commensurate with h.
const COMMENSURATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Vanishing,
    Periodic,
}

/// Analytic test-signal catalog plus file-backed samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SignalKind {
    /// amplitude * indicator of [support[0], support[1]).
    Rectangle { amplitude: C64, support: [f64; 2] },
    /// amplitude * sech(t / width).
    Sech { amplitude: C64, width: f64 },
    /// CSV file with header `t,re,im`, strictly increasing uniform t.
    Samples { path: PathBuf },
}

/// Everything needed to produce a grid except the resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalSpec {
    pub signal: SignalKind,
    pub t1: f64,
    pub t2: f64,
    #[serde(default = "default_kappa")]
    pub kappa: i64,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

fn default_kappa() -> i64 {
    -1
}

fn default_boundary() -> Boundary {
    Boundary::Vanishing
}

impl SignalSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ZsError::Io(format!("signal spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ZsError::Io(format!("{}: {e}", path.display())))?;
        let mut spec = Self::from_json(&text)?;
        // Relative sample paths resolve next to the spec file.
        if let SignalKind::Samples { path: ref mut p } = spec.signal {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(spec)
    }

    pub fn kappa(&self) -> Result<Kappa> {
        Kappa::from_i64(self.kappa)
    }
}

fn eval_analytic(kind: &SignalKind, t: f64) -> C64 {
    match kind {
        SignalKind::Rectangle { amplitude, support } => {
            // Half-open support: the left endpoint takes the inside value,
            // the right endpoint takes 0.
            if t >= support[0] && t < support[1] {
                *amplitude
            } else {
                C64::new(0.0, 0.0)
            }
        }
        SignalKind::Sech { amplitude, width } => {
            let x = t / width;
            amplitude * (1.0 / x.cosh())
        }
        SignalKind::Samples { .. } => unreachable!("file-backed signals are sampled separately"),
    }
}

/// Sampled potential on [T1, T2]: q at every substep node t = T1 + j h/nu,
/// j = 0..=nu*n_seg, immutable after construction.
#[derive(Debug, Clone)]
pub struct SignalGrid {
    samples: Vec<C64>,
    t1: f64,
    t2: f64,
    h: f64,
    nu: u32,
    n_seg: usize,
    kappa: Kappa,
    boundary: Boundary,
    ell_plus: i64,
    ell_minus: i64,
}

impl SignalGrid {
    /// Build a grid from explicit samples; lengths and commensurability are
    /// validated here, all constructors funnel through this.
    pub fn from_samples(
        samples: Vec<C64>,
        t1: f64,
        t2: f64,
        nu: u32,
        kappa: Kappa,
        boundary: Boundary,
    ) -> Result<Self> {
        if t2 <= t1 {
            return Err(ZsError::Grid(format!("need T2 > T1, got [{t1}, {t2}]")));
        }
        if nu == 0 {
            return Err(ZsError::Grid("substep count nu must be positive".into()));
        }
        if samples.len() < 2 || (samples.len() - 1) % nu as usize != 0 {
            return Err(ZsError::Grid(format!(
                "sample count {} does not match nu*N_seg + 1 with nu = {nu}",
                samples.len()
            )));
        }
        let n_seg = (samples.len() - 1) / nu as usize;
        let h = (t2 - t1) / n_seg as f64;
        let ell_plus = commensurate(t2, h, "T2")?;
        let ell_minus = commensurate(-t1, h, "-T1")?;
        if ell_plus + ell_minus != n_seg as i64 {
            return Err(ZsError::Grid(format!(
                "endpoint bookkeeping mismatch: l+ + l- = {} but N_seg = {n_seg}",
                ell_plus + ell_minus
            )));
        }
        Ok(SignalGrid {
            samples,
            t1,
            t2,
            h,
            nu,
            n_seg,
            kappa,
            boundary,
            ell_plus,
            ell_minus,
        })
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn sample(&self, j: usize) -> C64 {
        self.samples[j]
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn n_seg(&self) -> usize {
        self.n_seg
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// T2 / h (validated integer).
    pub fn ell_plus(&self) -> i64 {
        self.ell_plus
    }

    /// -T1 / h (validated integer).
    pub fn ell_minus(&self) -> i64 {
        self.ell_minus
    }

    /// Substep node count nu*N_seg + 1.
    pub fn node_count(&self) -> usize {
        self.samples.len()
    }

    /// Time of substep node j.
    pub fn node_time(&self, j: usize) -> f64 {
        self.t1 + j as f64 * self.h / self.nu as f64
    }

    /// Inverse of node_time for on-grid times.
    pub fn time_node(&self, t: f64) -> Result<usize> {
        let x = (t - self.t1) * self.nu as f64 / self.h;
        let j = x.round();
        if (x - j).abs() > 1e-6 || j < 0.0 || j as usize >= self.node_count() {
            return Err(ZsError::Grid(format!("time {t} is not a grid node")));
        }
        Ok(j as usize)
    }

    /// The nu+1 samples belonging to step n (shared endpoints with the
    /// neighbours).
    pub fn step_samples(&self, n: usize) -> &[C64] {
        let lo = n * self.nu as usize;
        &self.samples[lo..=lo + self.nu as usize]
    }

    /// Trapezoidal |q| integral over the grid; the L1 norm used by the
    /// scattering-coefficient bound checks.
    pub fn l1_norm(&self) -> f64 {
        let dt = self.h / self.nu as f64;
        let n = self.samples.len();
        let mut acc = 0.5 * (self.samples[0].norm() + self.samples[n - 1].norm());
        for s in &self.samples[1..n - 1] {
            acc += s.norm();
        }
        acc * dt
    }

    /// Same signal with the sample array rotated by `steps` whole steps;
    /// periodic grids only. Used to move the monodromy base point t0.
    pub fn rotated(&self, steps: usize) -> Result<SignalGrid> {
        if self.boundary != Boundary::Periodic {
            return Err(ZsError::Unsupported(
                "sample rotation requires a periodic grid".into(),
            ));
        }
        let shift = (steps % self.n_seg) * self.nu as usize;
        let body = self.n_seg * self.nu as usize;
        let mut samples = Vec::with_capacity(self.samples.len());
        for j in 0..body {
            samples.push(self.samples[(j + shift) % body]);
        }
        samples.push(samples[0]);
        SignalGrid::from_samples(samples, self.t1, self.t2, self.nu, self.kappa, self.boundary)
    }
}

fn commensurate(value: f64, h: f64, label: &str) -> Result<i64> {
    let x = value / h;
    let r = x.round();
    if (x - r).abs() > COMMENSURATE_TOL * x.abs().max(1.0) {
        return Err(ZsError::Grid(format!(
            "{label} = {value} is not an integer multiple of h = {h}; \
             endpoint exponents must be exact integers"
        )));
    }
    Ok(r as i64)
}

/// Sample a signal spec at all nu-substep nodes of an N_seg-step grid.
/// Values are raw q samples; scaling by h happens in the scheme builders.
pub fn sample_signal(spec: &SignalSpec, n_seg: usize, nu: u32) -> Result<SignalGrid> {
    if n_seg < 1 {
        return Err(ZsError::Grid("N_seg must be at least 1".into()));
    }
    if nu < 1 {
        return Err(ZsError::Grid("nu must be at least 1".into()));
    }
    let kappa = spec.kappa()?;
    let (t1, t2) = (spec.t1, spec.t2);
    if t2 <= t1 {
        return Err(ZsError::Grid(format!("need T2 > T1, got [{t1}, {t2}]")));
    }
    let h = (t2 - t1) / n_seg as f64;
    let count = nu as usize * n_seg + 1;
    let samples = match &spec.signal {
        SignalKind::Samples { path } => {
            let file = read_sample_csv(path)?;
            validate_file_grid(&file, t1, t2, h / nu as f64, count)?
        }
        kind => {
            let period = t2 - t1;
            (0..count)
                .map(|j| {
                    let mut t = t1 + j as f64 * h / nu as f64;
                    if spec.boundary == Boundary::Periodic {
                        t = t1 + (t - t1).rem_euclid(period);
                    }
                    eval_analytic(kind, t)
                })
                .collect()
        }
    };
    SignalGrid::from_samples(samples, t1, t2, nu, kappa, spec.boundary)
}

/// Parsed CSV rows (t, q).
fn read_sample_csv(path: &Path) -> Result<Vec<(f64, C64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ZsError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "t,re,im" => {}
        _ => {
            return Err(ZsError::Io(format!(
                "{}: expected header `t,re,im`",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| {
                    ZsError::Io(format!("{}:{}: missing {name}", path.display(), ln + 1))
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| ZsError::Io(format!("{}:{}: {name}: {e}", path.display(), ln + 1)))
        };
        let t = next("t")?;
        let re = next("re")?;
        let im = next("im")?;
        rows.push((t, C64::new(re, im)));
    }
    if rows.len() < 2 {
        return Err(ZsError::Io(format!(
            "{}: need at least 2 rows",
            path.display()
        )));
    }
    for w in rows.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(ZsError::Io(format!(
                "{}: t column must be strictly increasing",
                path.display()
            )));
        }
    }
    Ok(rows)
}

/// File rows must match the requested grid exactly; no resampling.
fn validate_file_grid(
    rows: &[(f64, C64)],
    t1: f64,
    t2: f64,
    dt: f64,
    count: usize,
) -> Result<Vec<C64>> {
    if rows.len() != count {
        return Err(ZsError::Grid(format!(
            "sample file has {} rows, grid needs {count}",
            rows.len()
        )));
    }
    let tol = 1e-9 * dt.max(1.0) + 1e-12 * (t1.abs() + t2.abs());
    for (j, (t, _)) in rows.iter().enumerate() {
        let want = t1 + j as f64 * dt;
        if (t - want).abs() > tol {
            return Err(ZsError::Grid(format!(
                "sample file node {j} at t = {t} does not match grid node {want}"
            )));
        }
    }
    Ok(rows.iter().map(|r| r.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rect_spec(a: C64, support: [f64; 2], t1: f64, t2: f64) -> SignalSpec {
        SignalSpec {
            signal: SignalKind::Rectangle { amplitude: a, support },
            t1,
            t2,
            kappa: -1,
            boundary: Boundary::Vanishing,
        }
    }

    fn sech_spec(a: C64, width: f64, t1: f64, t2: f64) -> SignalSpec {
        SignalSpec {
            signal: SignalKind::Sech { amplitude: a, width },
            t1,
            t2,
            kappa: -1,
            boundary: Boundary::Vanishing,
        }
    }

    #[test]
    fn zero_rectangle_all_samples_zero() {
        let spec = rect_spec(c(0.0, 0.0), [-1.0, 1.0], -1.0, 1.0);
        let grid = sample_signal(&spec, 4, 1).unwrap();
        assert_eq!(grid.node_count(), 5);
        assert!(grid.samples().iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn rectangle_boundary_convention() {
        // Indicator of [0, 1) sampled at t = -1, -0.5, ..., 2: the support
        // left endpoint takes the inside value, the right endpoint takes 0.
        let spec = rect_spec(c(1.0, 0.0), [0.0, 1.0], -1.0, 2.0);
        let grid = sample_signal(&spec, 6, 1).unwrap();
        let got: Vec<f64> = grid.samples().iter().map(|s| s.re).collect();
        assert_eq!(got, vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn sech_center_value() {
        let spec = sech_spec(c(2.0, 0.0), 1.0, -8.0, 8.0);
        let grid = sample_signal(&spec, 16, 1).unwrap();
        let j = grid.time_node(0.0).unwrap();
        assert!((grid.sample(j) - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn l1_norm_examples() {
        let zero = rect_spec(c(0.0, 0.0), [-1.0, 1.0], -1.0, 1.0);
        assert_eq!(sample_signal(&zero, 8, 1).unwrap().l1_norm(), 0.0);

        // Indicator of [0,1]: exact integral 1, trapezoid error O(h).
        let rect = rect_spec(c(1.0, 0.0), [0.0, 1.0], -1.0, 2.0);
        let grid = sample_signal(&rect, 3 * 512, 1).unwrap();
        assert!((grid.l1_norm() - 1.0).abs() < 2.0 * grid.h());

        // 2 sech(t): integral 2 pi.
        let sech = sech_spec(c(2.0, 0.0), 1.0, -24.0, 24.0);
        let grid = sample_signal(&sech, 4096, 1).unwrap();
        let h = grid.h();
        assert!((grid.l1_norm() - 2.0 * std::f64::consts::PI).abs() < 10.0 * h * h + 1e-9);
    }

    #[test]
    fn non_commensurate_endpoints_rejected() {
        // [-1, 1] with N_seg = 5: h = 0.4, T2/h = 2.5.
        let spec = rect_spec(c(1.0, 0.0), [-1.0, 1.0], -1.0, 1.0);
        match sample_signal(&spec, 5, 1) {
            Err(ZsError::Grid(_)) => {}
            other => panic!("expected GridError, got {other:?}"),
        }
    }

    #[test]
    fn periodic_wrap_is_bit_exact() {
        let spec = SignalSpec {
            signal: SignalKind::Sech { amplitude: c(1.0, 0.5), width: 0.7 },
            t1: -2.0,
            t2: 2.0,
            kappa: -1,
            boundary: Boundary::Periodic,
        };
        let grid = sample_signal(&spec, 16, 2).unwrap();
        let n = grid.node_count();
        // Sample at T2 wraps to T1 with the identical bit pattern.
        assert_eq!(grid.sample(0), grid.sample(n - 1));
    }

    #[test]
    fn csv_round_trip_and_mismatch() {
        let dir = std::env::temp_dir().join(format!("zs_sig_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sig.csv");
        let mut text = String::from("t,re,im\n");
        for j in 0..=8 {
            let t = -1.0 + 0.25 * j as f64;
            text.push_str(&format!("{t},{},{}\n", j as f64, -(j as f64)));
        }
        std::fs::write(&path, text).unwrap();
        let spec = SignalSpec {
            signal: SignalKind::Samples { path: path.clone() },
            t1: -1.0,
            t2: 1.0,
            kappa: 1,
            boundary: Boundary::Vanishing,
        };
        let grid = sample_signal(&spec, 8, 1).unwrap();
        assert_eq!(grid.sample(3), c(3.0, -3.0));
        // Same file against a grid with a different sample count.
        assert!(sample_signal(&spec, 4, 1).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn spec_json_schema() {
        let text = r#"{
            "signal": {"type": "sech", "amplitude": [1.0, 0.0], "width": 1.0},
            "t1": -16.0, "t2": 16.0, "kappa": -1
        }"#;
        let spec = SignalSpec::from_json(text).unwrap();
        assert_eq!(spec.boundary, Boundary::Vanishing);
        assert!(matches!(spec.signal, SignalKind::Sech { .. }));
    }

    proptest! {
        #[test]
        fn node_time_round_trip(n_seg in 1usize..64, nu in 1u32..5, j_frac in 0.0f64..1.0) {
            let spec = sech_spec(C64::new(1.0, 0.0), 1.0, -4.0, 4.0);
            if let Ok(grid) = sample_signal(&spec, n_seg, nu) {
                let j = ((grid.node_count() - 1) as f64 * j_frac) as usize;
                let t = grid.node_time(j);
                prop_assert_eq!(grid.time_node(t).unwrap(), j);
            }
        }
    }
}
