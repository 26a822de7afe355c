//! Text tables and the SVG coefficient plot for fitted models.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::regression::{confidence_intervals, ModelFit, RegressionResult, INTERCEPT};

pub fn format_p(p: f64) -> String {
    if p.is_nan() {
        "p = NA".into()
    } else if p < 0.001 {
        "p < 0.001".into()
    } else {
        format!("p = {p:.3}")
    }
}

/// e.g. `F(5, 641) = 38.73, p < 0.001, R² = 0.232`
pub fn model_line(f: f64, df_model: usize, df_resid: usize, p: f64, r_squared: f64) -> String {
    format!("F({df_model}, {df_resid}) = {f:.2}, {}, R² = {r_squared:.3}", format_p(p))
}

pub fn model_header(result: &RegressionResult) -> String {
    model_line(
        result.f_statistic,
        result.df_model,
        result.df_resid,
        result.f_p_value,
        result.r_squared,
    )
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3}")
    } else if v.is_nan() {
        "NA".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn pval(p: f64) -> String {
    if p.is_nan() {
        "NA".into()
    } else if p < 0.001 {
        "<0.001".into()
    } else {
        format!("{p:.3}")
    }
}

pub fn render_table(title: &str, result: &RegressionResult) -> String {
    let mut rows = vec![[
        "term".to_string(),
        "estimate".into(),
        "std.beta".into(),
        "SE".into(),
        "t".into(),
        "p".into(),
    ]];
    for c in &result.coefficients {
        rows.push([
            c.name.clone(),
            num(c.estimate),
            if c.name == INTERCEPT { String::new() } else { num(c.std_estimate) },
            num(c.std_error),
            num(c.t_value),
            pval(c.p_value),
        ]);
    }
    let widths: Vec<usize> = (0..6).map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "{title}: {} (n = {})", result.response, result.n);
    let _ = writeln!(out, "  {}", model_header(result));
    let _ = writeln!(out, "  adjusted R² = {:.3}", result.adj_r_squared);
    for row in rows {
        let mut line = String::from("  ");
        for (j, cell) in row.iter().enumerate() {
            if j == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[j]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[j]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn render_report(fits: &[ModelFit]) -> Result<String> {
    if fits.is_empty() {
        return Err(Error::IncompleteBundle {
            missing: vec!["model results".into()],
        });
    }
    let mut out = String::new();
    for (i, fit) in fits.iter().enumerate() {
        let _ = writeln!(out, "Model {} ({})", i + 1, fit.model);
        out.push_str(&render_table("  raw", &fit.raw));
        out.push_str(&render_table("  standardized", &fit.standardized));
        out.push('\n');
    }
    Ok(out)
}

/// Term, estimate, CI low, CI high.
type PlotRow = (String, f64, f64, f64);

const PANEL_W: f64 = 360.0;
const ROW_H: f64 = 28.0;
const MARGIN_L: f64 = 130.0;
const MARGIN_T: f64 = 40.0;

/// Standardized estimates with 95% CI whiskers, one panel per model.
pub fn coefficient_plot_svg(fits: &[ModelFit]) -> String {
    let panels: Vec<(String, Vec<PlotRow>)> = fits
        .iter()
        .map(|fit| {
            let ci = confidence_intervals(&fit.standardized, 0.95);
            let rows = fit
                .standardized
                .coefficients
                .iter()
                .zip(ci)
                .filter(|(c, _)| c.name != INTERCEPT)
                .map(|(c, iv)| (c.name.clone(), c.estimate, iv.lo, iv.hi))
                .collect();
            (fit.model.clone(), rows)
        })
        .collect();
    let n_rows = panels.iter().map(|p| p.1.len()).max().unwrap_or(0);
    let extent = panels
        .iter()
        .flat_map(|p| p.1.iter())
        .flat_map(|r| [r.1, r.2, r.3])
        .filter(|v| v.is_finite())
        .fold(0.1f64, |m, v| m.max(v.abs()))
        * 1.1;
    let plot_w = PANEL_W - MARGIN_L - 20.0;
    let height = MARGIN_T + ROW_H * n_rows as f64 + 40.0;
    let width = PANEL_W * panels.len().max(1) as f64;
    let x_of = |v: f64| MARGIN_L + (v.clamp(-extent, extent) + extent) / (2.0 * extent) * plot_w;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    for (i, (model, rows)) in panels.iter().enumerate() {
        let _ = writeln!(svg, r#"<g class="panel" transform="translate({:.1},0)">"#, i as f64 * PANEL_W);
        let label = char::from(b'a' + (i % 26) as u8);
        let _ = writeln!(svg, r#"<text x="10" y="20" font-weight="bold">{label}) {model}</text>"#);
        let zero = x_of(0.0);
        let bottom = MARGIN_T + ROW_H * rows.len() as f64;
        let _ = writeln!(
            svg,
            r##"<line class="zero" x1="{zero:.2}" y1="{:.2}" x2="{zero:.2}" y2="{bottom:.2}" stroke="#999" stroke-dasharray="3,3"/>"##,
            MARGIN_T - 10.0
        );
        for (r, (name, est, lo, hi)) in rows.iter().enumerate() {
            let y = MARGIN_T + ROW_H * (r as f64 + 0.5);
            let _ = writeln!(svg, r#"<text x="10" y="{:.2}">{name}</text>"#, y + 4.0);
            let _ = writeln!(
                svg,
                r##"<line class="ci" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#333" stroke-width="1.5"/>"##,
                x_of(*lo),
                x_of(*hi)
            );
            let _ = writeln!(
                svg,
                r##"<circle class="estimate" cx="{:.2}" cy="{y:.2}" r="4" fill="#1f4e9c"><title>{name}: {est:.3} [{lo:.3}, {hi:.3}]</title></circle>"##,
                x_of(*est)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">standardized coefficient (95% CI)</text>"#,
            MARGIN_L + plot_w / 2.0,
            bottom + 25.0
        );
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

pub const REQUIRED_ARTIFACTS: [&str; 4] = ["measures.csv", "features.csv", "regression.json", "coefficients.svg"];

/// Renders the report for a bundle directory written by the pipeline or by
/// the individual stage commands.
pub fn report(bundle: &Path) -> Result<String> {
    let missing: Vec<String> = REQUIRED_ARTIFACTS
        .iter()
        .filter(|name| !bundle.join(name).is_file())
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteBundle { missing });
    }
    let path = bundle.join("regression.json");
    let body = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let fits: Vec<ModelFit> = serde_json::from_str(&body)?;
    let mut out = render_report(&fits)?;
    let _ = writeln!(out, "plot: {}", bundle.join("coefficients.svg").display());
    Ok(out)
}
