//! Inter-annotator agreement on level-of-dialectness labels.
//!
//! [`fleiss_kappa`] treats labels as unordered categories and needs the same
//! number of raters on every item. [`krippendorff_alpha_interval`] works on
//! numeric values through the coincidence matrix, so items may have any number
//! of ratings (items with fewer than two are unpairable and ignored).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::CommentGroup;
use crate::labels::Level;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AgreementError {
    #[error("item {item} has {found} ratings, expected {expected}")]
    UnequalRaters {
        item: usize,
        found: usize,
        expected: usize,
    },
    #[error("need at least {needed} {what}, found {found}")]
    TooSmall {
        what: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("no pairable values: every item has fewer than two ratings")]
    NoPairableValues,
    #[error("non-finite rating value")]
    NonFinite,
}

/// An agreement coefficient with the counts it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Agreement {
    pub value: f64,
    pub items: usize,
    pub ratings: usize,
    /// Expected disagreement was zero (all ratings in one category), so the
    /// coefficient is 1 by convention rather than by computation.
    pub degenerate: bool,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Sum {
    sum: f64,
    carry: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn get(self) -> f64 {
        self.sum + self.carry
    }
}

/// Fleiss' kappa over categorical ratings, `n` raters per item.
///
/// ```
/// use aldi::agreement::fleiss_kappa;
///
/// let k = fleiss_kappa(&[vec!['A', 'A', 'A'], vec!['A', 'B', 'B']]).unwrap();
/// assert_eq!(k.value, 0.25);
/// ```
pub fn fleiss_kappa<T: Ord + Clone>(items: &[Vec<T>]) -> Result<Agreement, AgreementError> {
    if items.len() < 2 {
        return Err(AgreementError::TooSmall {
            what: "items",
            needed: 2,
            found: items.len(),
        });
    }
    let n = items[0].len();
    if n < 2 {
        return Err(AgreementError::TooSmall {
            what: "raters per item",
            needed: 2,
            found: n,
        });
    }
    if let Some((item, it)) = items.iter().enumerate().find(|(_, it)| it.len() != n) {
        return Err(AgreementError::UnequalRaters {
            item,
            found: it.len(),
            expected: n,
        });
    }

    // Everything is a ratio of integer counts, so work in integers and
    // divide once at the end.
    let mut totals: BTreeMap<&T, u128> = BTreeMap::new();
    let mut agree: u128 = 0;
    for it in items {
        let mut counts: BTreeMap<&T, u128> = BTreeMap::new();
        for r in it {
            *counts.entry(r).or_default() += 1;
        }
        let squares: u128 = counts.values().map(|c| c * c).sum();
        agree += squares - n as u128;
        for (k, c) in counts {
            *totals.entry(k).or_default() += c;
        }
    }
    let big_n = items.len();
    let ratings = big_n * n;
    if totals.len() == 1 {
        return Ok(Agreement {
            value: 1.0,
            items: big_n,
            ratings,
            degenerate: true,
        });
    }
    // p_bar = agree / d1, p_e = chance / d2
    let d1 = (big_n * n * (n - 1)) as u128;
    let d2 = (ratings as u128) * (ratings as u128);
    let chance: u128 = totals.values().map(|c| c * c).sum();
    let num = agree as i128 * d2 as i128 - chance as i128 * d1 as i128;
    let den = d1 as i128 * (d2 - chance) as i128;
    let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i128;
    Ok(Agreement {
        value: (num / g) as f64 / (den / g) as f64,
        items: big_n,
        ratings,
        degenerate: false,
    })
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Krippendorff's alpha with the interval metric δ² = (c − k)².
///
/// ```
/// use aldi::agreement::krippendorff_alpha_interval;
///
/// let a = krippendorff_alpha_interval(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
/// assert!(a.value.abs() < 1e-12);
/// ```
pub fn krippendorff_alpha_interval(items: &[Vec<f64>]) -> Result<Agreement, AgreementError> {
    if items.iter().flatten().any(|v| !v.is_finite()) {
        return Err(AgreementError::NonFinite);
    }
    let pairable: Vec<&Vec<f64>> = items.iter().filter(|it| it.len() >= 2).collect();
    if pairable.is_empty() {
        return Err(AgreementError::NoPairableValues);
    }

    let mut values: Vec<f64> = pairable.iter().flat_map(|it| it.iter().copied()).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let index = |v: f64| values.binary_search_by(|x| x.total_cmp(&v)).unwrap();
    let k = values.len();

    // coincidence matrix o[c][k] = Σ_u (ordered c-k pairs in u) / (m_u − 1)
    let mut o = vec![vec![Sum::default(); k]; k];
    for it in &pairable {
        let m = it.len();
        let mut counts = vec![0usize; k];
        for &v in it.iter() {
            counts[index(v)] += 1;
        }
        let w = 1.0 / (m - 1) as f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            for d in 0..k {
                let pairs = if c == d {
                    counts[c] * (counts[c] - 1)
                } else {
                    counts[c] * counts[d]
                };
                if pairs > 0 {
                    o[c][d].add(pairs as f64 * w);
                }
            }
        }
    }
    let o: Vec<Vec<f64>> = o.into_iter().map(|row| row.into_iter().map(Sum::get).collect()).collect();
    let n_c: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = n_c.iter().sum();
    let ratings: usize = pairable.iter().map(|it| it.len()).sum();

    let delta = |c: usize, d: usize| (values[c] - values[d]).powi(2);
    let mut observed = Sum::default();
    let mut expected = Sum::default();
    for c in 0..k {
        for d in 0..k {
            if c == d {
                continue;
            }
            observed.add(o[c][d] * delta(c, d));
            expected.add(n_c[c] * n_c[d] * delta(c, d));
        }
    }
    let d_e = expected.get();
    if k == 1 || d_e == 0.0 {
        return Ok(Agreement {
            value: 1.0,
            items: pairable.len(),
            ratings,
            degenerate: true,
        });
    }
    Ok(Agreement {
        value: 1.0 - (n - 1.0) * observed.get() / d_e,
        items: pairable.len(),
        ratings,
        degenerate: false,
    })
}

/// Both coefficients over the same item set.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    /// Groups with exactly three MSA/Little/Mixed/Most annotations.
    pub three_rating_items: usize,
    pub fleiss_kappa: Agreement,
    pub krippendorff_alpha: Agreement,
    /// Alpha over every group with two or more usable annotations.
    pub krippendorff_alpha_all: Agreement,
}

/// Agreement on kept groups: κ and α on items with exactly three usable
/// annotations, α again on all items with at least two.
pub fn corpus_agreement(groups: &[CommentGroup]) -> Result<AgreementReport, AgreementError> {
    let usable = |g: &CommentGroup| -> Vec<Level> { g.levels().filter(|l| l.is_usable()).collect() };
    let three: Vec<Vec<Level>> = groups
        .iter()
        .map(usable)
        .filter(|l| l.len() == 3)
        .collect();
    let as_values = |ls: &[Level]| -> Vec<f64> { ls.iter().filter_map(|l| l.value()).collect() };
    let three_values: Vec<Vec<f64>> = three.iter().map(|l| as_values(l)).collect();
    let all_values: Vec<Vec<f64>> = groups.iter().map(|g| as_values(&usable(g))).collect();
    Ok(AgreementReport {
        three_rating_items: three.len(),
        fleiss_kappa: fleiss_kappa(&three)?,
        krippendorff_alpha: krippendorff_alpha_interval(&three_values)?,
        krippendorff_alpha_all: krippendorff_alpha_interval(&all_values)?,
    })
}
