use crate::error::{Error, Result};
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

/// Uniform periodic sampling box: per-axis bounds and power-of-two sample
/// counts. Sample j on an axis sits at `lo + j * (hi - lo) / n`; the upper
/// bound itself is the periodic image of the lower one.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
    /// Relative threshold for the packet-support boundary check.
    pub decay_threshold: f64,
}

impl BoxSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        let d = lo.len();
        if d == 0 || hi.len() != d || n.len() != d {
            return Err(Error::invalid("box axes must have equal nonzero lengths"));
        }
        for axis in 0..d {
            if !(lo[axis].is_finite() && hi[axis].is_finite() && lo[axis] < hi[axis]) {
                return Err(Error::invalid(format!(
                    "box axis {axis} has invalid bounds [{}, {}]",
                    lo[axis], hi[axis]
                )));
            }
            if n[axis] < 2 || !n[axis].is_power_of_two() {
                return Err(Error::NonPowerOfTwoGrid {
                    axis,
                    count: n[axis],
                });
            }
        }
        Ok(Self {
            lo,
            hi,
            n,
            decay_threshold: 1e-9,
        })
    }

    /// Symmetric cube [-half, half]^dim with n samples per axis.
    pub fn cube(dim: usize, half: f64, n: usize) -> Result<Self> {
        Self::new(vec![-half; dim], vec![half; dim], vec![n; dim])
    }

    pub fn with_decay_threshold(mut self, threshold: f64) -> Self {
        self.decay_threshold = threshold;
        self
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.n
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn len(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn dx(&self, axis: usize) -> f64 {
        self.len(axis) / self.n[axis] as f64
    }

    /// Momentum spacing of the dual grid, 2 pi / L.
    pub fn dq(&self, axis: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.len(axis)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.len(a)).product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.dx(a)).product()
    }

    pub fn total_samples(&self) -> usize {
        self.n.iter().product()
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, &j)| self.lo[a] + j as f64 * self.dx(a))
            .collect()
    }

    /// Doubles the sample count on every axis (same bounds).
    pub fn refined(&self) -> Result<Self> {
        let n = self.n.iter().map(|&v| v * 2).collect();
        let mut s = Self::new(self.lo.clone(), self.hi.clone(), n)?;
        s.decay_threshold = self.decay_threshold;
        Ok(s)
    }

    /// The two-variable box over (x, y) pairs: every axis duplicated.
    pub fn squared(&self) -> Result<Self> {
        let mut lo = self.lo.clone();
        lo.extend_from_slice(&self.lo);
        let mut hi = self.hi.clone();
        hi.extend_from_slice(&self.hi);
        let mut n = self.n.clone();
        n.extend_from_slice(&self.n);
        let mut s = Self::new(lo, hi, n)?;
        s.decay_threshold = self.decay_threshold;
        Ok(s)
    }
}

/// Calls `f` for every multi-index of the given shape, in row-major order.
pub fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    let d = shape.len();
    let mut idx = vec![0usize; d];
    if shape.iter().any(|&n| n == 0) {
        return;
    }
    loop {
        f(&idx);
        let mut axis = d;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < shape[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Complex samples over a `BoxSpec`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    spec: BoxSpec,
    samples: ArrayD<Complex64>,
}

impl GridFunction {
    pub fn new(spec: BoxSpec, samples: ArrayD<Complex64>) -> Result<Self> {
        if samples.shape() != spec.counts() {
            return Err(Error::invalid(format!(
                "sample shape {:?} does not match box counts {:?}",
                samples.shape(),
                spec.counts()
            )));
        }
        Ok(Self { spec, samples })
    }

    pub fn sample_fn(spec: &BoxSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut samples = ArrayD::zeros(IxDyn(spec.counts()));
        for_each_index(spec.counts(), |idx| {
            samples[IxDyn(idx)] = f(&spec.point(idx));
        });
        Self {
            spec: spec.clone(),
            samples,
        }
    }

    pub fn spec(&self) -> &BoxSpec {
        &self.spec
    }

    pub fn samples(&self) -> &ArrayD<Complex64> {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut ArrayD<Complex64> {
        &mut self.samples
    }

    pub fn value(&self, idx: &[usize]) -> Complex64 {
        self.samples[IxDyn(idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Largest |value| on the outermost sample layer of any axis.
    pub fn boundary_max_abs(&self) -> f64 {
        let shape = self.spec.counts().to_vec();
        let mut m = 0.0f64;
        for_each_index(&shape, |idx| {
            let on_boundary = idx
                .iter()
                .zip(&shape)
                .any(|(&j, &n)| j == 0 || j == n - 1);
            if on_boundary {
                m = m.max(self.samples[IxDyn(idx)].norm());
            }
        });
        m
    }

    /// Riemann sum of the samples times the cell volume.
    pub fn integral(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() * self.spec.cell_volume()
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.samples.shape(), other.samples.shape());
        self.samples
            .iter()
            .zip(other.samples.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// For a grid over (x, y) pairs built with `BoxSpec::squared`, extracts
    /// the diagonal x = y as a grid over the base box.
    pub fn diagonal(&self, base: &BoxSpec) -> Result<GridFunction> {
        let d = base.dim();
        if self.spec.dim() != 2 * d || self.spec.counts()[..d] != *base.counts() {
            return Err(Error::invalid("grid is not the square of the given base box"));
        }
        let mut out = ArrayD::zeros(IxDyn(base.counts()));
        for_each_index(base.counts(), |idx| {
            let mut full = idx.to_vec();
            full.extend_from_slice(idx);
            out[IxDyn(idx)] = self.samples[IxDyn(&full)];
        });
        GridFunction::new(base.clone(), out)
    }
}
