//! Run-off triangles.
//!
//! Accident years are 1-indexed (`1..=n`), development years 0-indexed
//! (`0..n`). Row `i` is observed for `j <= n - i`; every other cell belongs to
//! the future triangle and is absent.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriangleKind {
    Incremental,
    Cumulative,
}

impl TriangleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TriangleKind::Incremental => "incremental",
            TriangleKind::Cumulative => "cumulative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ValidationOptions {
    /// Accept negative incremental cells (salvage, recoveries). Running
    /// cumulative sums must still stay positive.
    pub allow_negative_increments: bool,
}

/// A cell of the future (lower-right) triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FutureCellIndex {
    accident_year: usize,
    dev_year: usize,
}

impl FutureCellIndex {
    pub fn new(n: usize, accident_year: usize, dev_year: usize) -> Result<Self> {
        if accident_year < 2 || accident_year > n || dev_year + accident_year <= n || dev_year >= n
        {
            return Err(Error::Shape(format!(
                "(accident year {accident_year}, dev {dev_year}) is not a future cell of a {n}-year triangle"
            )));
        }
        Ok(FutureCellIndex {
            accident_year,
            dev_year,
        })
    }

    pub fn accident_year(&self) -> usize {
        self.accident_year
    }

    pub fn dev_year(&self) -> usize {
        self.dev_year
    }

    /// Every future cell of an `n`-year triangle, row-major.
    pub fn all(n: usize) -> impl Iterator<Item = FutureCellIndex> {
        (2..=n).flat_map(move |i| {
            (n + 1 - i..n).map(move |j| FutureCellIndex {
                accident_year: i,
                dev_year: j,
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    kind: TriangleKind,
    rows: Vec<Vec<f64>>,
    origin_year: Option<i64>,
    unit: Option<String>,
}

impl Triangle {
    /// Builds a triangle from its observed rows; row `i` (1-based) must carry
    /// exactly `n - i + 1` values.
    pub fn new(kind: TriangleKind, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_options(kind, rows, ValidationOptions::default())
    }

    pub fn with_options(
        kind: TriangleKind,
        rows: Vec<Vec<f64>>,
        options: ValidationOptions,
    ) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Shape(
                "a triangle needs at least one accident year".into(),
            ));
        }
        for (idx, row) in rows.iter().enumerate() {
            let expected = n - idx;
            if row.len() != expected {
                return Err(Error::Shape(format!(
                    "accident year {} has {} observed cells, expected {}",
                    idx + 1,
                    row.len(),
                    expected
                )));
            }
        }
        for (idx, row) in rows.iter().enumerate() {
            let mut running = 0.0;
            for (j, &value) in row.iter().enumerate() {
                let cell = |reason| Error::InvalidCell {
                    accident_year: idx + 1,
                    dev_year: j,
                    value,
                    reason,
                };
                if !value.is_finite() {
                    return Err(cell("not a finite number"));
                }
                match kind {
                    TriangleKind::Cumulative => {
                        if value <= 0.0 {
                            return Err(cell("cumulative cells must be strictly positive"));
                        }
                    }
                    TriangleKind::Incremental => {
                        if value < 0.0 && !options.allow_negative_increments {
                            return Err(cell(
                                "negative increment (allow_negative_increments is off)",
                            ));
                        }
                        running += value;
                        if running <= 0.0 {
                            return Err(Error::InvalidCell {
                                accident_year: idx + 1,
                                dev_year: j,
                                value: running,
                                reason: "cumulative sum must be strictly positive",
                            });
                        }
                    }
                }
            }
        }
        Ok(Triangle {
            kind,
            rows,
            origin_year: None,
            unit: None,
        })
    }

    pub fn with_origin_year(mut self, year: i64) -> Self {
        self.origin_year = Some(year);
        self
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = Some(unit.into());
        self
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn kind(&self) -> TriangleKind {
        self.kind
    }

    pub fn origin_year(&self) -> Option<i64> {
        self.origin_year
    }

    pub fn unit(&self) -> Option<&str> {
        self.unit.as_deref()
    }

    /// Label of accident year `i`: the calendar year when the origin is known.
    pub fn accident_year_label(&self, accident_year: usize) -> i64 {
        match self.origin_year {
            Some(origin) => origin + accident_year as i64 - 1,
            None => accident_year as i64,
        }
    }

    /// Cell `(i, j)`, or `None` for future or out-of-range cells.
    pub fn get(&self, accident_year: usize, dev_year: usize) -> Option<f64> {
        accident_year
            .checked_sub(1)
            .and_then(|r| self.rows.get(r))
            .and_then(|row| row.get(dev_year))
            .copied()
    }

    pub fn is_observed(&self, accident_year: usize, dev_year: usize) -> bool {
        accident_year >= 1 && accident_year <= self.n() && dev_year + accident_year <= self.n()
    }

    /// Observed cells of accident year `i`.
    pub fn row(&self, accident_year: usize) -> &[f64] {
        &self.rows[accident_year - 1]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.iter().map(Vec::as_slice)
    }

    /// Latest diagonal value `S_{i,n-i}`.
    pub fn latest(&self, accident_year: usize) -> f64 {
        *self.rows[accident_year - 1]
            .last()
            .expect("rows are non-empty")
    }

    /// Pairs `(S_{i,j-1}, S_{i,j})` for the `n - j` rows observed at `j`.
    pub fn link_pairs(&self, dev_year: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let rows = if dev_year >= 1 && dev_year < self.n() {
            &self.rows[..self.n() - dev_year]
        } else {
            &self.rows[..0]
        };
        rows.iter().map(move |r| (r[dev_year - 1], r[dev_year]))
    }

    fn require(&self, kind: TriangleKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch {
                expected: kind.as_str(),
            });
        }
        Ok(())
    }

    pub(crate) fn require_cumulative(&self) -> Result<()> {
        self.require(TriangleKind::Cumulative)
    }

    /// Running row sums. Already-cumulative input is returned unchanged.
    pub fn cumulate(&self) -> Triangle {
        if self.kind == TriangleKind::Cumulative {
            return self.clone();
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .scan(0.0, |acc, &c| {
                        *acc += c;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        Triangle {
            kind: TriangleKind::Cumulative,
            rows,
            origin_year: self.origin_year,
            unit: self.unit.clone(),
        }
    }

    /// Successive differences along each row. Already-incremental input is
    /// returned unchanged.
    pub fn decumulate(&self) -> Triangle {
        if self.kind == TriangleKind::Incremental {
            return self.clone();
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = Vec::with_capacity(row.len());
                let mut prev = 0.0;
                for &s in row {
                    out.push(s - prev);
                    prev = s;
                }
                out
            })
            .collect();
        Triangle {
            kind: TriangleKind::Incremental,
            rows,
            origin_year: self.origin_year,
            unit: self.unit.clone(),
        }
    }

    /// Every cell multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Triangle> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::domain("scale factor", "c > 0", c));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|v| v * c).collect())
            .collect();
        Ok(Triangle {
            kind: self.kind,
            rows,
            origin_year: self.origin_year,
            unit: self.unit.clone(),
        })
    }

    /// Canonical CSV text: the exchange header, one line per accident year,
    /// shortest round-trip number formatting, empty future cells, LF endings.
    pub fn canonical_csv(&self) -> String {
        let n = self.n();
        let mut out = String::from("accident_year");
        for j in 0..n {
            let _ = write!(out, ",dev_{j}");
        }
        out.push('\n');
        for i in 1..=n {
            let _ = write!(out, "{}", self.accident_year_label(i));
            for j in 0..n {
                out.push(',');
                if let Some(v) = self.get(i, j) {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Hex SHA-256 of the triangle kind and its canonical CSV.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.kind.as_str().as_bytes());
        hasher.update(b"\n");
        hasher.update(self.canonical_csv().as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest.iter() {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn fixture_incremental() -> Triangle {
        Triangle::new(
            TriangleKind::Incremental,
            vec![vec![100.0, 50.0, 15.0], vec![110.0, 44.0], vec![120.0]],
        )
        .unwrap()
    }

    #[test]
    fn cumulate_fixture() {
        let c = fixture_incremental().cumulate();
        assert_eq!(c.kind(), TriangleKind::Cumulative);
        assert_eq!(c.row(1), &[100.0, 150.0, 165.0]);
        assert_eq!(c.row(2), &[110.0, 154.0]);
        assert_eq!(c.row(3), &[120.0]);
    }

    #[test]
    fn cumulate_and_decumulate_small_rows() {
        let t = Triangle::new(
            TriangleKind::Incremental,
            vec![vec![5.0, 3.0, 2.0], vec![1.0, 1.0], vec![7.0]],
        )
        .unwrap();
        let c = t.cumulate();
        assert_eq!(c.row(1), &[5.0, 8.0, 10.0]);
        assert_eq!(c.row(3), &[7.0]);
        assert_eq!(c.decumulate().row(1), &[5.0, 3.0, 2.0]);
        assert_eq!(c.decumulate(), t);
    }

    #[test]
    fn observed_mask() {
        let t = fixture_incremental();
        for i in 1..=3 {
            for j in 0..3 {
                assert_eq!(t.get(i, j).is_some(), j <= 3 - i);
                assert_eq!(t.is_observed(i, j), j <= 3 - i);
            }
        }
        assert_eq!(t.get(0, 0), None);
        assert_eq!(t.get(4, 0), None);
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = Triangle::new(
            TriangleKind::Cumulative,
            vec![vec![1.0, 2.0], vec![1.0, 2.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        assert!(Triangle::new(TriangleKind::Cumulative, vec![]).is_err());
    }

    #[test]
    fn rejects_nonpositive_cumulative() {
        let err = Triangle::new(
            TriangleKind::Cumulative,
            vec![vec![100.0, 150.0], vec![0.0]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::InvalidCell {
                accident_year: 2,
                dev_year: 0,
                value: 0.0,
                reason: "cumulative cells must be strictly positive"
            }
        );
    }

    #[test]
    fn decreasing_cumulative_rows_are_accepted() {
        assert!(
            Triangle::new(TriangleKind::Cumulative, vec![vec![100.0, 60.0], vec![5.0]]).is_ok()
        );
    }

    #[test]
    fn negative_increments_need_opt_in() {
        let rows = vec![vec![100.0, -10.0], vec![50.0]];
        assert!(Triangle::new(TriangleKind::Incremental, rows.clone()).is_err());
        let opts = ValidationOptions {
            allow_negative_increments: true,
        };
        let t = Triangle::with_options(TriangleKind::Incremental, rows, opts).unwrap();
        assert_eq!(t.cumulate().row(1), &[100.0, 90.0]);
        let bad = vec![vec![100.0, -100.0], vec![50.0]];
        assert!(matches!(
            Triangle::with_options(TriangleKind::Incremental, bad, opts),
            Err(Error::InvalidCell { dev_year: 1, .. })
        ));
    }

    #[test]
    fn future_cells() {
        let all: Vec<_> = FutureCellIndex::all(3).collect();
        assert_eq!(
            all,
            vec![
                FutureCellIndex::new(3, 2, 2).unwrap(),
                FutureCellIndex::new(3, 3, 1).unwrap(),
                FutureCellIndex::new(3, 3, 2).unwrap(),
            ]
        );
        assert!(FutureCellIndex::new(3, 1, 2).is_err());
        assert!(FutureCellIndex::new(3, 2, 1).is_err());
        assert!(FutureCellIndex::new(3, 3, 3).is_err());
        assert_eq!(FutureCellIndex::all(1).count(), 0);
        assert_eq!(FutureCellIndex::all(10).count(), 45);
    }

    #[test]
    fn link_pairs_cover_n_minus_j_rows() {
        let c = fixture_incremental().cumulate();
        let pairs: Vec<_> = c.link_pairs(1).collect();
        assert_eq!(pairs, vec![(100.0, 150.0), (110.0, 154.0)]);
        assert_eq!(c.link_pairs(2).collect::<Vec<_>>(), vec![(150.0, 165.0)]);
        assert_eq!(c.link_pairs(0).count(), 0);
        assert_eq!(c.link_pairs(3).count(), 0);
    }

    #[test]
    fn canonical_csv_and_fingerprint() {
        let c = fixture_incremental().cumulate().with_origin_year(2019);
        assert_eq!(
            c.canonical_csv(),
            "accident_year,dev_0,dev_1,dev_2\n2019,100,150,165\n2020,110,154,\n2021,120,,\n"
        );
        assert_eq!(c.fingerprint().len(), 64);
        assert_eq!(c.fingerprint(), c.clone().fingerprint());
        assert_ne!(c.fingerprint(), c.decumulate().fingerprint());
    }

    fn incremental_triangle() -> impl Strategy<Value = Triangle> {
        (1usize..8).prop_flat_map(|n| {
            let rows: Vec<_> = (0..n)
                .map(|i| proptest::collection::vec(0u32..1_000_000, n - i))
                .collect();
            rows.prop_map(|rows| {
                let rows = rows
                    .into_iter()
                    .map(|r| {
                        let mut r: Vec<f64> = r.into_iter().map(f64::from).collect();
                        r[0] += 1.0;
                        r
                    })
                    .collect();
                Triangle::new(TriangleKind::Incremental, rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn cumulate_decumulate_round_trip(t in incremental_triangle()) {
            let c = t.cumulate();
            prop_assert_eq!(c.decumulate(), t.clone());
            prop_assert_eq!(c.decumulate().cumulate(), c.clone());
            for i in 1..=t.n() {
                prop_assert_eq!(c.row(i)[0], t.row(i)[0]);
                prop_assert_eq!(c.row(i).len(), t.n() - i + 1);
            }
        }
    }
}
