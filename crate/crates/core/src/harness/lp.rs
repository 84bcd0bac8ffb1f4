//! Linearised OWA model in CPLEX LP format.
//!
//! For nonincreasing weights,
//! `OWA_w(y) = min { Σ_k (p_k + q_k) : p_k + q_j ≥ w_k y_j  ∀ j, k }`
//! with `p, q` free, so the written model is
//!
//! ```text
//! minimize   Σ_k (p_k + q_k)
//! subject to p_k + q_j − Σ_i w_k c_ij x_i ≥ 0      (row ord_k_j)
//!            Σ_i b_i x_i ≥ demand                 (row demand)
//!            Σ_i b_i x_i ≤ capacity               (row capacity, if any)
//!            x binary, p and q free
//! ```
//!
//! Variables are 1-based: `x_1 … x_n`, `p_1 … p_K`, `q_1 … q_K`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::KnapsackInstance;

const LINE_WIDTH: usize = 78;

/// Collects `±coef name` terms into lines no wider than [`LINE_WIDTH`].
struct Expr {
    lines: Vec<String>,
}

impl Expr {
    fn new(head: String) -> Self {
        Self { lines: vec![head] }
    }

    fn term(&mut self, coef: f64, name: &str) {
        if coef == 0.0 {
            return;
        }
        let sign = if coef < 0.0 { '-' } else { '+' };
        let mag = coef.abs();
        let text = if mag == 1.0 {
            format!(" {sign} {name}")
        } else {
            format!(" {sign} {mag} {name}")
        };
        self.push(&text);
    }

    fn push(&mut self, text: &str) {
        let last = self.lines.last_mut().unwrap();
        if last.len() + text.len() > LINE_WIDTH && !last.trim().is_empty() {
            self.lines.push(format!("   {}", text.trim_start()));
        } else {
            last.push_str(text);
        }
    }

    fn finish(mut self, tail: &str, out: &mut String) {
        self.push(tail);
        for l in self.lines {
            out.push_str(&l);
            out.push('\n');
        }
    }
}

pub fn render_mip(inst: &KnapsackInstance) -> Result<String> {
    let w = inst.weights();
    if !w.is_nonincreasing() {
        return Err(Error::Precondition(
            "the linearised OWA model requires nonincreasing weights".into(),
        ));
    }
    let (n, k) = (inst.n(), inst.k());
    let mut out = String::new();
    out.push_str(&format!(
        "\\ OWA min-knapsack {}: {n} items, {k} objectives\n",
        if inst.name().is_empty() { "instance" } else { inst.name() }
    ));
    out.push_str("Minimize\n");
    let mut obj = Expr::new(" obj:".into());
    for t in 1..=k {
        obj.term(1.0, &format!("p_{t}"));
        obj.term(1.0, &format!("q_{t}"));
    }
    obj.finish("", &mut out);

    out.push_str("Subject To\n");
    for (kk, &wk) in w.as_slice().iter().enumerate() {
        for j in 0..k {
            let mut row = Expr::new(format!(" ord_{}_{}:", kk + 1, j + 1));
            row.term(1.0, &format!("p_{}", kk + 1));
            row.term(1.0, &format!("q_{}", j + 1));
            for i in 0..n {
                row.term(-wk * inst.costs().get(i, j), &format!("x_{}", i + 1));
            }
            row.finish(" >= 0", &mut out);
        }
    }
    let load = |label: &str, tail: String, out: &mut String| {
        let mut row = Expr::new(format!(" {label}:"));
        for (i, &b) in inst.item_weights().iter().enumerate() {
            row.term(b, &format!("x_{}", i + 1));
        }
        if row.lines.len() == 1 && row.lines[0].ends_with(':') {
            // no item has positive weight; keep the row well-formed
            row.push(" 0 x_1");
        }
        row.finish(&tail, out);
    };
    load("demand", format!(" >= {}", inst.demand()), &mut out);
    if let Some(cap) = inst.capacity() {
        load("capacity", format!(" <= {cap}"), &mut out);
    }

    out.push_str("Bounds\n");
    for t in 1..=k {
        out.push_str(&format!(" p_{t} free\n q_{t} free\n"));
    }
    out.push_str("Binary\n");
    let mut bin = Expr::new(String::new());
    for i in 1..=n {
        bin.push(&format!(" x_{i}"));
    }
    bin.finish("", &mut out);
    out.push_str("End\n");
    Ok(out)
}

pub fn export_mip(inst: &KnapsackInstance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_mip(inst)?)?;
    Ok(())
}
