//! Tables of the block-aggregation ratio `ρℓ` for α-generated weights.

use std::io::Write;

use serde::Serialize;

use crate::aggregation::{padding_needed, worst_case_bound};
use crate::error::Result;
use crate::generators::weights_alpha;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    pub k: usize,
    pub block_sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    /// `values[a][l]` for `alphas[a]` and `block_sizes[l]`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Cell {
    k: usize,
    alpha: f64,
    l: usize,
    bound: f64,
    bound_rounded: String,
}

/// `ρℓ` for `weights_alpha(K, α)` at every `(α, ℓ)`; weights are padded
/// with zeros when `ℓ` does not divide `K`.
pub fn bounds_table(k: usize, block_sizes: &[usize], alphas: &[f64]) -> Result<BoundsTable> {
    let mut values = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let w = weights_alpha(k, alpha)?;
        let row = block_sizes
            .iter()
            .map(|&l| {
                let padded = w.padded(padding_needed(k, l.max(1)));
                worst_case_bound(&padded, l)
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    Ok(BoundsTable {
        k,
        block_sizes: block_sizes.to_vec(),
        alphas: alphas.to_vec(),
        values,
    })
}

impl BoundsTable {
    pub fn get(&self, alpha_index: usize, l_index: usize) -> f64 {
        self.values[alpha_index][l_index]
    }

    /// Fixed-width text with values rounded to two decimals.
    pub fn render(&self) -> String {
        let mut out = format!("{:>10}", "alpha \\ l");
        for l in &self.block_sizes {
            out.push_str(&format!("{l:>8}"));
        }
        out.push('\n');
        for (alpha, row) in self.alphas.iter().zip(&self.values) {
            out.push_str(&format!("{:>10}", format!("{alpha:e}")));
            for v in row {
                out.push_str(&format!("{v:>8.2}"));
            }
            out.push('\n');
        }
        out
    }

    /// Long-format CSV: `k,alpha,l,bound,bound_rounded`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (alpha, row) in self.alphas.iter().zip(&self.values) {
            for (&l, &bound) in self.block_sizes.iter().zip(row) {
                w.serialize(Cell {
                    k: self.k,
                    alpha: *alpha,
                    l,
                    bound,
                    bound_rounded: format!("{bound:.2}"),
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
