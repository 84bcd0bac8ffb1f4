//! Plain-text instance files.
//!
//! ```text
//! owa-knapsack-instance 1
//! name example
//! items 4
//! objectives 2
//! demand 2
//! capacity none
//! rows
//! 1 3 0.5
//! ...
//! weights
//! 0.7 0.3
//! ```
//!
//! Each row holds an item weight followed by its `K` costs. Numbers are
//! written in shortest round-trip form, so write → read → write is
//! byte-identical. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{CostMatrix, KnapsackInstance, WeightVector};

pub const FORMAT_HEADER: &str = "owa-knapsack-instance 1";

pub fn render_instance(inst: &KnapsackInstance) -> Result<String> {
    if inst.name().contains(['\n', '\r']) {
        return Err(Error::InvalidInstance("name must fit on one line".into()));
    }
    let mut out = String::new();
    writeln!(out, "{FORMAT_HEADER}").unwrap();
    writeln!(out, "name {}", inst.name()).unwrap();
    writeln!(out, "items {}", inst.n()).unwrap();
    writeln!(out, "objectives {}", inst.k()).unwrap();
    writeln!(out, "demand {}", inst.demand()).unwrap();
    match inst.capacity() {
        Some(cap) => writeln!(out, "capacity {cap}").unwrap(),
        None => writeln!(out, "capacity none").unwrap(),
    }
    writeln!(out, "rows").unwrap();
    for i in 0..inst.n() {
        let row = std::iter::once(inst.item_weights()[i]).chain(inst.costs().row(i).iter().copied());
        writeln!(out, "{}", join(row)).unwrap();
    }
    writeln!(out, "weights").unwrap();
    writeln!(out, "{}", join(inst.weights().as_slice().iter().copied())).unwrap();
    Ok(out)
}

fn join(xs: impl Iterator<Item = f64>) -> String {
    xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_instance(inst: &KnapsackInstance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_instance(inst)?)?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<KnapsackInstance> {
    parse_instance(&fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next(&mut self, expecting: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(Error::Parse {
                line: self.last + 1,
                message: format!("unexpected end of file, expected {expecting}"),
            }),
        }
    }

    /// `key value` line; returns the value text.
    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next(&format!("`{key}`"))?;
        let (k, v) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        if k != key {
            return Err(Error::Parse {
                line: n,
                message: format!("expected `{key}`, found `{k}`"),
            });
        }
        Ok((n, v.trim()))
    }

    fn keyword(&mut self, key: &str) -> Result<()> {
        let (n, line) = self.next(&format!("`{key}`"))?;
        if line != key {
            return Err(Error::Parse {
                line: n,
                message: format!("expected `{key}`, found `{line}`"),
            });
        }
        Ok(())
    }
}

fn number<T: std::str::FromStr>(text: &str, line: usize, field: &str) -> Result<T> {
    text.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {field} `{text}`"),
    })
}

fn numbers(text: &str, line: usize, field: &str) -> Result<Vec<f64>> {
    text.split_whitespace().map(|t| number(t, line, field)).collect()
}

pub fn parse_instance(text: &str) -> Result<KnapsackInstance> {
    let mut lines = Lines::new(text);
    let (n, header) = lines.next("format header")?;
    if header != FORMAT_HEADER {
        return Err(Error::Parse {
            line: n,
            message: format!("expected `{FORMAT_HEADER}`"),
        });
    }
    let (_, name) = lines.field("name")?;
    let (ln, v) = lines.field("items")?;
    let items: usize = number(v, ln, "item count")?;
    let (ln, v) = lines.field("objectives")?;
    let k: usize = number(v, ln, "objective count")?;
    let (ln, v) = lines.field("demand")?;
    let demand: f64 = number(v, ln, "demand")?;
    let (ln, v) = lines.field("capacity")?;
    let capacity = match v {
        "none" => None,
        _ => Some(number::<f64>(v, ln, "capacity")?),
    };
    lines.keyword("rows")?;
    let mut item_weights = Vec::with_capacity(items);
    let mut entries = Vec::with_capacity(items * k);
    for _ in 0..items {
        let (ln, line) = lines.next("an item row")?;
        if line == "weights" {
            return Err(Error::Dimension {
                what: "item rows",
                expected: items,
                found: item_weights.len(),
            });
        }
        let row = numbers(line, ln, "number")?;
        if row.len() != k + 1 {
            return Err(Error::Dimension {
                what: "item row (weight then costs)",
                expected: k + 1,
                found: row.len(),
            });
        }
        item_weights.push(row[0]);
        entries.extend_from_slice(&row[1..]);
    }
    let (ln, line) = lines.next("`weights`")?;
    if line != "weights" {
        return Err(if numbers(line, ln, "number").is_ok() {
            Error::Dimension {
                what: "item rows",
                expected: items,
                found: items + 1,
            }
        } else {
            Error::Parse {
                line: ln,
                message: format!("expected `weights`, found `{line}`"),
            }
        });
    }
    let (ln, line) = lines.next("the weight vector")?;
    let w = numbers(line, ln, "weight")?;
    if w.len() != k {
        return Err(Error::Dimension {
            what: "weight vector",
            expected: k,
            found: w.len(),
        });
    }
    if let Some((ln, extra)) = lines.inner.next() {
        return Err(Error::Parse {
            line: ln,
            message: format!("unexpected trailing content `{extra}`"),
        });
    }
    let costs = CostMatrix::new(items, k, entries)?;
    Ok(KnapsackInstance::new(item_weights, demand, capacity, costs, WeightVector::new(w)?)?.with_name(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
owa-knapsack-instance 1
name tiny one
items 2
objectives 2
demand 1
capacity 1.5
rows
1 3 0.5
# comment
1 0 2

weights
0.7 0.3
";

    #[test]
    fn parses_and_renders_sample() {
        let inst = parse_instance(SAMPLE).unwrap();
        assert_eq!(inst.name(), "tiny one");
        assert_eq!(inst.costs().row(0), &[3.0, 0.5]);
        assert_eq!(inst.capacity(), Some(1.5));
        let text = render_instance(&inst).unwrap();
        assert_eq!(parse_instance(&text).unwrap(), inst);
        assert_eq!(render_instance(&parse_instance(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn errors_name_the_line() {
        let bad = SAMPLE.replace("1 0 2", "1 0 x");
        match parse_instance(&bad) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 10);
                assert!(message.contains("`x`"));
            }
            other => panic!("{other:?}"),
        }
        match parse_instance(&SAMPLE.replace("demand 1", "demnd 1")) {
            Err(Error::Parse { line: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_and_invariant_errors_are_validation() {
        let short = SAMPLE.replace("1 0 2", "1 0");
        assert!(matches!(parse_instance(&short), Err(Error::Dimension { .. })));
        let missing = SAMPLE.replace("items 2", "items 3");
        assert!(matches!(parse_instance(&missing), Err(Error::Dimension { .. })));
        let w = SAMPLE.replace("0.7 0.3", "0.6 0.3");
        assert!(matches!(parse_instance(&w), Err(Error::InvalidWeights(_))));
        let neg = SAMPLE.replace("1 3 0.5", "1 -3 0.5");
        let err = parse_instance(&neg).unwrap_err();
        assert!(err.is_validation() && !matches!(err, Error::Parse { .. }));
    }
}
