//! Executes a parsed experiment config and assembles the report document.
//!
//! Reports separate `data` (raw numbers) from `verdicts` (threshold
//! comparisons); `meta` holds the only run-dependent content (timestamps,
//! thread counts), so the config/data/verdict blocks are byte-reproducible.

use crate::error::{Error, Result};
use crate::gns::{
    commutative_limit_sweep, cyclicity_profile, gram, isotropic_quotient, krein_decompose,
    GramMatrix, GramOptions,
};
use crate::grid::BoxSpec;
use crate::linalg::hermitian_eigen;
use crate::packet::TestFunction;
use crate::profile::StarVariant;
use crate::star::{sample, star_fft, star_gaussian_closed, star_series, tilde_star_2pt, SeriesOrder};
use crate::theta::ThetaMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use super::config::{ExperimentConfig, ExperimentKind};

/// One named threshold comparison.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
}

impl Check {
    fn leq(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            pass: value <= threshold,
            value: Some(value),
            threshold: Some(threshold),
        }
    }

    fn geq(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            pass: value >= threshold,
            value: Some(value),
            threshold: Some(threshold),
        }
    }

    fn flag(name: &str, pass: bool) -> Self {
        Check {
            name: name.into(),
            pass,
            value: None,
            threshold: None,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "pass": self.pass,
            "value": self.value.map(finite_or_null).unwrap_or(Value::Null),
            "threshold": self.threshold.map(finite_or_null).unwrap_or(Value::Null),
        })
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &DMatrix<Complex64>) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
        .collect();
    Value::Array(rows)
}

/// Everything a run produces; file IO is the caller's concern.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Value,
    pub sweep_csv: Option<String>,
    pub all_pass: bool,
}

/// Relative sup-distance between two grids.
fn grid_rel(diff_max: f64, reference_max: f64) -> f64 {
    if reference_max == 0.0 {
        if diff_max == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff_max / reference_max
    }
}

fn run_star_eval(cfg: &ExperimentConfig) -> Result<(Value, Vec<Check>)> {
    let theta = cfg.require_theta()?;
    let functions = cfg.build_functions()?;
    if functions.len() < 2 {
        return Err(Error::invalid("star_eval needs at least two functions"));
    }
    let f = &functions[0];
    let g = &functions[1];
    let spec = cfg.require_grid()?;
    let order = SeriesOrder::new(cfg.series_order.unwrap_or(8))?;

    let closed = star_gaussian_closed(f, g, &theta)?;
    let closed_grid = sample(&closed, &spec);
    let fft_grid = star_fft(f, g, &theta, &spec)?;
    let series_grid = sample(&star_series(f, g, &theta, order)?, &spec);

    let reference_max = closed_grid.max_abs();
    let fft_rel = grid_rel(fft_grid.max_abs_diff(&closed_grid), reference_max);
    let series_rel = grid_rel(series_grid.max_abs_diff(&closed_grid), reference_max);

    let star_integral = fft_grid.integral();
    let plain_integral = sample(&f.pointwise_mul(g)?, &spec).integral();
    let trace_rel = grid_rel((star_integral - plain_integral).norm(), plain_integral.norm());

    let mut data = Map::new();
    data.insert("fft_vs_closed_rel".into(), finite_or_null(fft_rel));
    data.insert("series_vs_closed_rel".into(), finite_or_null(series_rel));
    data.insert("series_order".into(), json!(order.get()));
    data.insert("trace_rel".into(), finite_or_null(trace_rel));
    data.insert("star_integral".into(), complex_json(star_integral));
    data.insert("plain_integral".into(), complex_json(plain_integral));

    let tol = &cfg.tolerances;
    let mut checks = vec![
        Check::leq("fft_vs_closed", fft_rel, tol.fft_vs_closed),
        Check::leq("series_vs_closed", series_rel, tol.series_vs_closed),
        Check::leq("trace_identity", trace_rel, tol.trace_identity),
    ];

    if let Some(vspec) = &cfg.variant {
        let variant = vspec.build()?;
        if !variant.is_plain() {
            // a capped grid keeps the two-variable sampling affordable
            let n_cap: Vec<usize> = spec.counts().iter().map(|&n| n.min(16)).collect();
            let capped = BoxSpec::new(spec.lo().to_vec(), spec.hi().to_vec(), n_cap)?
                .with_decay_threshold(spec.decay_threshold);
            let damped = tilde_star_2pt(&variant, f, g, &theta, &capped)?;
            let plain = tilde_star_2pt(&StarVariant::plain(), f, g, &theta, &capped)?;
            let dd = damped.diagonal(&capped)?;
            let pd = plain.diagonal(&capped)?;
            let diag_rel = grid_rel(dd.max_abs_diff(&pd), pd.max_abs());
            data.insert("damped_diagonal_rel".into(), finite_or_null(diag_rel));
            checks.push(Check::leq(
                "damped_diagonal_identity",
                diag_rel,
                tol.damped_diagonal,
            ));
        }
    }

    Ok((Value::Object(data), checks))
}

fn gram_data(g: &GramMatrix) -> Result<Value> {
    let herm = (g.entries() + g.entries().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = hermitian_eigen(&herm)?;
    Ok(json!({
        "entries": matrix_json(g.entries()),
        "hermiticity_residual": g.hermiticity_residual(),
        "eigenvalues": eig.values,
        "size": g.n(),
    }))
}

fn run_gram(cfg: &ExperimentConfig) -> Result<(Value, Vec<Check>)> {
    let theta = cfg.require_theta()?;
    let field = cfg.require_field()?;
    let functions = cfg.build_functions()?;
    let basis = cfg.require_vectors(&functions)?;
    let opts = GramOptions {
        budget: cfg.budget,
        tolerance: cfg.tolerances.isotropic_rel,
    };
    let g = gram(&basis, &field, &theta, &opts)?;
    let data = gram_data(&g)?;
    let checks = vec![Check::leq(
        "gram_hermiticity",
        g.hermiticity_residual(),
        cfg.tolerances.gram_hermiticity,
    )];
    Ok((data, checks))
}

fn run_quotient_krein(cfg: &ExperimentConfig) -> Result<(Value, Vec<Check>)> {
    let tolerance = cfg.tolerances.isotropic_rel;
    let g = if let Some(matrix) = cfg.synthetic_matrix()? {
        GramMatrix::from_entries(vec![], matrix, tolerance)?
    } else {
        let theta = cfg.require_theta()?;
        let field = cfg.require_field()?;
        let functions = cfg.build_functions()?;
        let basis = cfg.require_vectors(&functions)?;
        let opts = GramOptions {
            budget: cfg.budget,
            tolerance,
        };
        gram(&basis, &field, &theta, &opts)?
    };

    let q = isotropic_quotient(&g)?;
    let mut data = Map::new();
    data.insert("input_size".into(), json!(g.n()));
    data.insert("asymmetry".into(), finite_or_null(q.asymmetry));
    data.insert("null_dim".into(), json!(q.null_dim));
    data.insert("all_isotropic".into(), json!(q.all_isotropic));

    let mut checks = vec![Check::leq(
        "gram_hermiticity",
        q.asymmetry,
        cfg.tolerances.gram_hermiticity * g.max_abs().max(1.0),
    )];

    if q.all_isotropic {
        data.insert("signature".into(), json!([0, 0]));
        return Ok((Value::Object(data), checks));
    }

    let k = krein_decompose(&q.reduced, q.null_dim)?;
    let def = k.definite_product_matrix();
    let def_eig = hermitian_eigen(&def)?;
    let min_def = def_eig.values.first().copied().unwrap_or(0.0);

    data.insert("signature".into(), json!([k.signature.0, k.signature.1]));
    data.insert(
        "reduced_eigenvalues".into(),
        json!((0..q.reduced.n())
            .map(|i| q.reduced.entries()[(i, i)].re)
            .collect::<Vec<_>>()),
    );
    data.insert(
        "reconstruction_residual".into(),
        finite_or_null(k.reconstruction_residual()),
    );
    data.insert(
        "cross_block_defect".into(),
        finite_or_null(k.cross_block_defect()),
    );
    data.insert("definite_product_min_eigenvalue".into(), finite_or_null(min_def));

    let scale = q.reduced.max_abs().max(1.0);
    checks.push(Check::leq(
        "krein_reconstruction",
        k.reconstruction_residual(),
        cfg.tolerances.krein_reconstruction * scale,
    ));
    checks.push(Check::geq(
        "definite_product_positive",
        min_def,
        f64::MIN_POSITIVE,
    ));
    if let Some((p, m)) = cfg.expected_signature {
        checks.push(Check::flag(
            "signature_matches_expected",
            k.signature == (p, m),
        ));
    }
    Ok((Value::Object(data), checks))
}

fn run_limit_sweep(cfg: &ExperimentConfig) -> Result<(Value, Vec<Check>, Option<String>)> {
    let pattern = cfg.require_theta()?;
    if pattern.is_zero() {
        return Err(Error::invalid("limit_sweep needs a nonzero theta pattern"));
    }
    let field = cfg.require_field()?;
    let functions = cfg.build_functions()?;
    let basis = cfg.require_vectors(&functions)?;
    let sweep_values = cfg
        .theta_sweep
        .as_ref()
        .ok_or_else(|| Error::invalid("config is missing `theta_sweep`"))?;
    let scale0 = pattern.sup_norm();
    let thetas: Vec<ThetaMatrix> = sweep_values
        .iter()
        .map(|&s| pattern.scaled(s / scale0))
        .collect();
    let opts = GramOptions {
        budget: cfg.budget,
        tolerance: cfg.tolerances.isotropic_rel,
    };
    let sweep = commutative_limit_sweep(&basis, &field, &thetas, &opts)?;

    let mut csv = String::from("theta_sup,deviation_max\n");
    {
        let mut wtr = csv::WriterBuilder::new().from_writer(Vec::new());
        for &(t, d) in &sweep.rows {
            wtr.write_record(&[format!("{t:e}"), format!("{d:e}")])
                .map_err(|e| Error::invalid(format!("csv: {e}")))?;
        }
        let body = wtr
            .into_inner()
            .map_err(|e| Error::invalid(format!("csv: {e}")))?;
        csv.push_str(&String::from_utf8_lossy(&body));
    }

    let data = json!({
        "rows": sweep.rows.iter().map(|&(t, d)| json!([t, d])).collect::<Vec<_>>(),
        "monotone": sweep.monotone,
        "final_exact_zero": sweep.final_exact_zero,
        "slope": sweep.slope.map(finite_or_null).unwrap_or(Value::Null),
    });

    let mut checks = vec![
        Check::flag("deviation_monotone", sweep.monotone),
        Check::flag("final_row_exact_zero", sweep.final_exact_zero),
    ];
    match sweep.slope {
        Some(s) => checks.push(Check::geq("slope", s, cfg.tolerances.sweep_slope_min)),
        None => {
            // no slope is acceptable only when the Gram never moved at all
            let flat = sweep.rows.iter().all(|&(_, d)| d == 0.0);
            checks.push(Check::flag("slope", flat));
        }
    }
    Ok((data, checks, Some(csv)))
}

fn run_hermiticity(cfg: &ExperimentConfig) -> Result<(Value, Vec<Check>)> {
    let field = cfg.require_field()?;
    let orders = cfg
        .hermiticity_orders
        .clone()
        .unwrap_or_else(|| vec![2, 4, 6]);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &n in &orders {
        let dev = field.hermiticity_check(n, cfg.hermiticity_samples, cfg.seed.wrapping_add(n as u64))?;
        rows.push(json!({"n": n, "max_deviation": dev, "samples": cfg.hermiticity_samples}));
        checks.push(Check::leq(
            &format!("hermiticity_n{n}"),
            dev,
            cfg.tolerances.hermiticity_max,
        ));
    }
    Ok((json!({ "orders": rows }), checks))
}

fn run_cyclicity(cfg: &ExperimentConfig) -> Result<(Value, Vec<Check>)> {
    let theta = cfg.require_theta()?;
    let field = cfg.require_field()?;
    let generators = cfg.build_functions()?;
    let max_level = cfg
        .max_level
        .ok_or_else(|| Error::invalid("config is missing `max_level`"))?;
    let opts = GramOptions {
        budget: cfg.budget,
        tolerance: cfg.tolerances.isotropic_rel,
    };
    let profile = cyclicity_profile(&field, &theta, &generators, max_level, &opts)?;
    let nondecreasing = profile.windows(2).all(|w| w[1].1 >= w[0].1);
    let mut checks = vec![Check::flag("ranks_nondecreasing", nondecreasing)];
    if let Some(expected) = &cfg.expected_ranks {
        let got: Vec<usize> = profile.iter().map(|&(_, r)| r).collect();
        checks.push(Check::flag("ranks_match_expected", &got == expected));
    }
    let data = json!({
        "profile": profile.iter().map(|&(l, r)| json!([l, r])).collect::<Vec<_>>(),
    });
    Ok((data, checks))
}

/// Runs the configured experiment and assembles the report document.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let (data, checks, sweep_csv) = match cfg.experiment {
        ExperimentKind::StarEval => {
            let (d, c) = run_star_eval(cfg)?;
            (d, c, None)
        }
        ExperimentKind::Gram => {
            let (d, c) = run_gram(cfg)?;
            (d, c, None)
        }
        ExperimentKind::QuotientKrein => {
            let (d, c) = run_quotient_krein(cfg)?;
            (d, c, None)
        }
        ExperimentKind::LimitSweep => run_limit_sweep(cfg)?,
        ExperimentKind::Hermiticity => {
            let (d, c) = run_hermiticity(cfg)?;
            (d, c, None)
        }
        ExperimentKind::Cyclicity => {
            let (d, c) = run_cyclicity(cfg)?;
            (d, c, None)
        }
    };
    let all_pass = checks.iter().all(|c| c.pass);
    let report = json!({
        "config": serde_json::to_value(cfg).map_err(|e| Error::invalid(e.to_string()))?,
        "data": data,
        "verdicts": {
            "checks": checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "all_pass": all_pass,
        },
        "meta": {
            "tool": "star-gns",
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp_unix": std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            "threads": rayon::current_num_threads(),
        },
    });
    Ok(RunOutcome {
        report,
        sweep_csv,
        all_pass,
    })
}

/// The deterministic portion of a report (everything except `meta`).
pub fn deterministic_blocks(report: &Value) -> Value {
    json!({
        "config": report["config"],
        "data": report["data"],
        "verdicts": report["verdicts"],
    })
}
