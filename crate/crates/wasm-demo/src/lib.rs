//! Browser bindings for three operations: the group or Drazin inverse of a
//! typed matrix, the λ-pair explorer and block-formula adjudication.
//!
//! Matrices are entered as text, one row per line (or `;`), entries split
//! by spaces or commas, each entry a complex literal such as `2`, `-i` or
//! `1.5-0.5i`. Every entry point returns a plain-text report.

use std::fmt::Write;

use num_complex::Complex64;
use wasm_bindgen::prelude::*;

use ginv::blocks::{block_hypotheses, BlockContext, BlockInstance, TheoremId};
use ginv::matrix::{relative_residual, ComplexMatrix, ToleranceProfile};
use ginv::spectral::{drazin_inverse, group_inverse, group_inverse_at_scale};
use ginv::sums::{pair_scale, LambdaDetection, SumContext};
use ginv::Error;

fn parse_scalar(s: &str) -> Result<Complex64, String> {
    let t = s.trim().replace(' ', "");
    let t = match t.as_str() {
        "i" | "+i" => "1i".to_string(),
        "-i" => "-1i".to_string(),
        _ => t.replace("+i", "+1i").replace("-i", "-1i"),
    };
    t.parse::<Complex64>().map_err(|_| format!("`{s}` is not a complex number"))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, String> {
    let rows: Vec<Vec<Complex64>> = text
        .split(['\n', ';'])
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|e| !e.is_empty())
                .map(|e| parse_scalar(e).map_err(|msg| format!("row {}: {msg}", i + 1)))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(format!("row {} has {} entries, row 1 has {cols}", i + 1, rows[i].len()));
    }
    Ok(ComplexMatrix::from_rows(&rows))
}

fn fmt_scalar(z: Complex64) -> String {
    let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    match (re, im) {
        (_, 0.0) => format!("{re:.6}"),
        (0.0, _) => format!("{im:.6}i"),
        _ => format!("{re:.6}{im:+.6}i"),
    }
}

fn fmt_matrix(m: &ComplexMatrix) -> String {
    let cells: Vec<Vec<String>> = (0..m.rows()).map(|i| m.row(i).iter().map(|&z| fmt_scalar(z)).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "  [ {} ]", line.join("  "));
    }
    if m.rows() == 0 {
        out.push_str("  (empty)\n");
    }
    out
}

/// Group inverse of `matrix`, or its Drazin inverse when `drazin` is set.
pub fn inverse_report(matrix: &str, drazin: bool) -> Result<String, String> {
    let m = parse_matrix(matrix)?;
    let tol = ToleranceProfile::default();
    let mut out = String::new();
    if drazin {
        let d = drazin_inverse(&m, &tol).map_err(|e| e.to_string())?;
        let _ = writeln!(out, "Drazin index {}\n\nM^D =\n{}", d.index, fmt_matrix(&d.inverse));
        let _ = write!(out, "spectral idempotent I - M M^D =\n{}", fmt_matrix(&d.idempotent(&m)));
        return Ok(out);
    }
    match group_inverse(&m, &tol) {
        Ok(g) => {
            let _ = writeln!(out, "rank {}, core condition {:.3e}\n\nM^# =\n{}", g.rank, g.core_condition, fmt_matrix(&g.inverse));
            let _ = writeln!(out, "spectral idempotent M^π =\n{}", fmt_matrix(&g.idempotent));
            let r = g.axiom_residuals;
            let _ = writeln!(out, "axiom residuals: commute {:.1e}, inner {:.1e}, outer {:.1e}", r.commute, r.inner, r.outer);
        }
        Err(e @ Error::NotGroupInvertible { .. }) => {
            let _ = writeln!(out, "{e}\n\nTry the Drazin inverse instead.");
        }
        Err(e) => return Err(e.to_string()),
    }
    Ok(out)
}

/// Intertwining constant of `(a, b)`, the three existence conditions and
/// the closed form for `(a + b)^#` against the direct computation.
pub fn lambda_pair_report(a: &str, b: &str) -> Result<String, String> {
    let (a, b) = (parse_matrix(a)?, parse_matrix(b)?);
    let tol = ToleranceProfile::default();
    let ctx = SumContext::new(&a, &b, &tol).map_err(|e| e.to_string())?;
    let mut out = String::new();
    match ctx.lambda {
        LambdaDetection::Certificate(c) => {
            let _ = writeln!(out, "ab = λ ba with λ = {} (fit residual {:.1e})", fmt_scalar(c.lambda), c.residual);
        }
        LambdaDetection::BothZero => out.push_str("ab = ba = 0, so every λ works; λ = 1 is used\n"),
    }
    let eq = ctx.equivalence().map_err(|e| e.to_string())?;
    let yes = |b: bool| if b { "yes" } else { "no" };
    let _ = writeln!(out, "\ngroup inverse exists for");
    let _ = writeln!(out, "  a + b              {}", yes(eq.exists_sum));
    let _ = writeln!(out, "  a(1 + a^# b)       {}", yes(eq.exists_cond2));
    let _ = writeln!(out, "  ab b^# + ba a^#    {}", yes(eq.exists_cond3));
    if !eq.exists_sum {
        return Ok(out);
    }
    let sum = &a + &b;
    let oracle = group_inverse_at_scale(&sum, pair_scale(&a, &b), &tol).map_err(|e| e.to_string())?.inverse;
    let formula = ctx.sum_formula().map_err(|e| e.to_string())?;
    let _ = writeln!(out, "\n(a + b)^# by the closed form =\n{}", fmt_matrix(&formula));
    let _ = writeln!(out, "relative residual against the direct computation: {:.2e}", relative_residual(&formula, &oracle));
    Ok(out)
}

/// Hypothesis residuals for THM32 and the residual of every formula
/// variant against the group inverse of the assembled block matrix.
pub fn block_report(a: &str, b: &str, c: &str, d: &str, lambda: &str) -> Result<String, String> {
    let lambda = parse_scalar(lambda)?;
    let inst = BlockInstance::new(parse_matrix(a)?, parse_matrix(b)?, parse_matrix(c)?, parse_matrix(d)?, lambda)
        .map_err(|e| e.to_string())?;
    let tol = ToleranceProfile::default();
    let theorem = TheoremId::Thm32;
    let report = block_hypotheses(&inst, theorem, &tol).map_err(|e| e.to_string())?;
    let mut out = String::from("hypotheses\n");
    for label in theorem.hypotheses() {
        let r = report.residuals[*label];
        let mark = if r <= tol.residual_rtol { "ok" } else { "FAILS" };
        let _ = writeln!(out, "  {label:<10} {r:.2e}  {mark}");
    }
    let _ = writeln!(
        out,
        "  group invertible: A {}, D {}, BC {}, CB {}",
        report.a_group, report.d_group, report.bc_group, report.cb_group
    );
    let m = inst.assemble();
    let oracle = match group_inverse(&m, &tol) {
        Ok(g) => g.inverse,
        Err(e @ Error::NotGroupInvertible { .. }) => {
            let _ = writeln!(out, "\nassembled matrix: {e}");
            return Ok(out);
        }
        Err(e) => return Err(e.to_string()),
    };
    let _ = writeln!(out, "\nM^# of the assembled matrix =\n{}", fmt_matrix(&oracle));
    if !report.passes(&tol) {
        out.push_str("hypotheses fail; the formulas below are evaluated anyway\n");
    }
    let ctx = BlockContext::new(&inst, &tol).map_err(|e| e.to_string())?;
    for &variant in theorem.variants() {
        let line = match ctx.evaluate(theorem, variant) {
            Ok(x) => {
                let r = relative_residual(&x, &oracle);
                let verdict = if r <= 1e-8 { "matches" } else { "differs" };
                format!("{r:.2e}  {verdict}")
            }
            Err(e) => format!("undefined ({e})"),
        };
        let _ = writeln!(out, "  {:<10} {line}", variant.label());
    }
    Ok(out)
}

#[wasm_bindgen(js_name = inverse)]
pub fn inverse_js(matrix: &str, drazin: bool) -> Result<String, JsError> {
    inverse_report(matrix, drazin).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = lambdaPair)]
pub fn lambda_pair_js(a: &str, b: &str) -> Result<String, JsError> {
    lambda_pair_report(a, b).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = blockFormulas)]
pub fn block_js(a: &str, b: &str, c: &str, d: &str, lambda: &str) -> Result<String, JsError> {
    block_report(a, b, c, d, lambda).map_err(|e| JsError::new(&e))
}
