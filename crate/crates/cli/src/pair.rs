use defq::trace_grid::{chi_tr_u0, corpus_from_json, mu_tilde};
use serde_json::Value;

use crate::{CliError, Outcome, TraceNormalization, U0Convention};

/// Spectral tail above which a grid counts as under-resolved.
pub const RESOLUTION_TOLERANCE: f64 = 1e-8;
/// Relative size of negative hbar powers still counted as zero.
pub const SINGULAR_TOLERANCE: f64 = 1e-6;
/// Relative error below which both sides are taken to vanish.
pub const DEGENERATE_TOLERANCE: f64 = 1e-10;
pub const ORDER_RANGE: (f64, f64) = (0.75, 1.25);

/// Least-squares slope of `log error` against `log hbar`.
pub fn fitted_order(hbars: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = hbars.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

/// Scaling study of `chi_Tr(U0)(a0 ⊗ a1 ⊗ a2) + ∫ mu_tilde` over `halvings`
/// halvings of hbar, as CSV.
pub fn cmd_pair(
    corpus: &[u8],
    grid: Option<usize>,
    hbar: f64,
    halvings: usize,
    normalization: TraceNormalization,
    convention: U0Convention,
) -> Result<Outcome, CliError> {
    let mut v: Value = serde_json::from_slice(corpus)?;
    if let Some(g) = grid {
        v.as_object_mut().ok_or_else(|| CliError::Input("corpus must be a json object".into()))?.insert("G".into(), g.into());
    }
    if !(hbar > 0.0) {
        return Err(CliError::Input(format!("hbar must be positive, got {hbar}")));
    }
    let (spec, symbols) = corpus_from_json(&v)?;
    if symbols.len() != 3 {
        return Err(CliError::Input(format!("corpus must define symbols 0, 1, 2; found {}", symbols.len())));
    }
    let normalized = normalization == TraceNormalization::Normalized;
    let chi = chi_tr_u0(&symbols, convention == U0Convention::Signed, normalized)?;
    let minus_mu = -mu_tilde(&symbols, normalized)?;
    let scale = symbols.iter().map(|s| s.norm()).product::<f64>() * spec.area();
    let tail = symbols.iter().map(|s| s.spectral_tail()).fold(0.0, f64::max);

    let mut w = csv::Writer::from_writer(Vec::new());
    let header = ["test", "G", "K", "hbar", "chi_re", "chi_im", "minus_mu_re", "minus_mu_im", "error", "ratio", "tolerance", "status"];
    w.write_record(header).map_err(|e| CliError::Input(e.to_string()))?;
    let (g, k) = (spec.points.to_string(), spec.order.to_string());
    let mut hbars = Vec::new();
    let mut errors = Vec::new();
    for step in 0..=halvings {
        let h = hbar / f64::powi(2.0, step as i32);
        let value = chi.eval(h);
        let error = (value - minus_mu).norm();
        let ratio = errors.last().map(|prev: &f64| fmt(prev / error)).unwrap_or_default();
        w.write_record([
            "hoved_scaling",
            &g,
            &k,
            &fmt(h),
            &fmt(value.re),
            &fmt(value.im),
            &fmt(minus_mu.re),
            &fmt(minus_mu.im),
            &fmt(error),
            &ratio,
            "",
            "",
        ])
        .map_err(|e| CliError::Input(e.to_string()))?;
        hbars.push(h);
        errors.push(error);
    }

    let singular = chi.singular_part();
    let singular_tol = SINGULAR_TOLERANCE * chi.max_abs().max(scale * f64::EPSILON);
    let singular_ok = singular <= singular_tol;

    let degenerate = errors.iter().all(|e| *e <= DEGENERATE_TOLERANCE * scale);
    let resolved = tail <= RESOLUTION_TOLERANCE;
    let (order_cell, order_status, mut exit) = if !resolved {
        (String::new(), "inconclusive", 3)
    } else if degenerate {
        (String::new(), "pass", 0)
    } else if halvings == 0 {
        (String::new(), "inconclusive", 3)
    } else {
        let order = fitted_order(&hbars, &errors);
        let ok = (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&order);
        (fmt(order), if ok { "pass" } else { "fail" }, if ok { 0 } else { 1 })
    };
    if !singular_ok && exit != 3 {
        exit = 1;
    }
    let blank = String::new();
    let summary = |test: &str, value: &str, tolerance: &str, status: &str| {
        vec![test.to_string(), g.clone(), k.clone(), blank.clone(), blank.clone(), blank.clone(), blank.clone(), blank.clone(), value.to_string(), blank.clone(), tolerance.to_string(), status.to_string()]
    };
    let rows = [
        summary("fitted_order", &order_cell, &format!("{}..{}", ORDER_RANGE.0, ORDER_RANGE.1), order_status),
        summary("negative_hbar_powers", &fmt(singular), &fmt(singular_tol), if singular_ok { "pass" } else { "fail" }),
        summary("spectral_tail", &fmt(tail), &fmt(RESOLUTION_TOLERANCE), if resolved { "pass" } else { "inconclusive" }),
    ];
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::Input(e.to_string()))?).expect("csv is utf-8");
    Ok(Outcome { text, exit })
}
