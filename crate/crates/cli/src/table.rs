//! The table of constants per `(n, p)`.

use afftrace::constants::{sharp_k, ConstantSet, Dimensions};
use serde::Serialize;

use crate::config::Format;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantRow {
    pub n: usize,
    pub p: f64,
    /// Classical `K_n`, which does not depend on `p`.
    pub k_n: f64,
    pub a_np: f64,
    pub c_np: f64,
    pub a_norm: f64,
    pub d1: f64,
    pub d2: f64,
    pub d2_sharp: f64,
}

pub fn constants_table(dims: &[Dimensions]) -> Vec<ConstantRow> {
    dims.iter()
        .map(|&d| {
            let s = ConstantSet::new(d);
            ConstantRow {
                n: d.n(),
                p: d.p(),
                k_n: sharp_k(d.n()).expect("n >= 3"),
                a_np: s.a_np,
                c_np: s.c_np,
                a_norm: s.a_norm,
                d1: s.d1,
                d2: s.d2,
                d2_sharp: s.d2_sharp,
            }
        })
        .collect()
}

/// The table as a JSON array or as CSV with a header row.
pub fn emit_constants_table(dims: &[Dimensions], format: Format) -> String {
    let rows = constants_table(dims);
    match format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).expect("rows serialize");
            }
            if rows.is_empty() {
                return String::new();
            }
            String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_at_two_have_a_equal_to_k() {
        let dims: Vec<_> = (3..=8).map(|n| Dimensions::new(n, 2.0).unwrap()).collect();
        for r in constants_table(&dims) {
            assert!((r.a_np / r.k_n - 1.0).abs() < 1e-12, "{r:?}");
        }
        let k3 = constants_table(&[Dimensions::new(3, 2.0).unwrap()])[0].k_n;
        assert!((k3 - 0.564190).abs() < 1e-6);
    }

    #[test]
    fn empty_table() {
        assert!(constants_table(&[]).is_empty());
        assert_eq!(emit_constants_table(&[], Format::Json).trim(), "[]");
        assert_eq!(emit_constants_table(&[], Format::Csv), "");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let text = emit_constants_table(&[Dimensions::new(4, 1.5).unwrap()], Format::Csv);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("n,p,k_n,a_np"));
    }
}
