use crate::{Error, Result};

/// Fleiss' kappa for an items × categories matrix of rating counts, where
/// every item was rated by exactly `raters` raters.
pub fn fleiss_kappa(counts: &[Vec<u64>], raters: u64) -> Result<f64> {
    if raters < 2 {
        return Err(Error::Validation("Fleiss' kappa needs at least 2 raters per item".into()));
    }
    if counts.is_empty() {
        return Err(Error::Validation("Fleiss' kappa needs at least one item".into()));
    }
    let categories = counts[0].len();
    let mut column_totals = vec![0u64; categories];
    let mut agreement_sum = 0.0;
    let mut perfect = true;
    for (i, row) in counts.iter().enumerate() {
        if row.len() != categories {
            return Err(Error::Validation(format!(
                "item {i} has {} categories, expected {categories}",
                row.len()
            )));
        }
        let total: u64 = row.iter().sum();
        if total != raters {
            return Err(Error::Validation(format!(
                "item {i} has {total} ratings, expected {raters}"
            )));
        }
        let squares: u64 = row.iter().map(|c| c * c).sum();
        perfect &= squares == raters * raters;
        agreement_sum += (squares - raters) as f64 / (raters * (raters - 1)) as f64;
        for (t, c) in column_totals.iter_mut().zip(row) {
            *t += c;
        }
    }
    if perfect {
        return Ok(1.0);
    }
    let items = counts.len() as f64;
    let mean_agreement = agreement_sum / items;
    let all = items * raters as f64;
    let chance: f64 = column_totals
        .iter()
        .map(|&t| {
            let p = t as f64 / all;
            p * p
        })
        .sum();
    if chance >= 1.0 {
        return Err(Error::Validation(
            "kappa is undefined: chance agreement is 1 but observed agreement is not".into(),
        ));
    }
    Ok((mean_agreement - chance) / (1.0 - chance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_agreement() {
        let counts = vec![vec![3, 0, 0], vec![0, 3, 0], vec![3, 0, 0]];
        assert_eq!(fleiss_kappa(&counts, 3).unwrap(), 1.0);
        assert_eq!(fleiss_kappa(&[vec![2, 0], vec![2, 0]], 2).unwrap(), 1.0);
    }

    #[test]
    fn two_item_example() {
        let k = fleiss_kappa(&[vec![2, 0], vec![1, 1]], 2).unwrap();
        assert!((k + 1.0 / 3.0).abs() < 1e-12, "{k}");
    }

    #[test]
    fn fleiss_1971_table() {
        // Classic worked example: 10 subjects, 14 raters, 5 categories; kappa ≈ 0.210.
        let counts = vec![
            vec![0, 0, 0, 0, 14],
            vec![0, 2, 6, 4, 2],
            vec![0, 0, 3, 5, 6],
            vec![0, 3, 9, 2, 0],
            vec![2, 2, 8, 1, 1],
            vec![7, 7, 0, 0, 0],
            vec![3, 2, 6, 3, 0],
            vec![2, 5, 3, 2, 2],
            vec![6, 5, 2, 1, 0],
            vec![0, 2, 2, 3, 7],
        ];
        let k = fleiss_kappa(&counts, 14).unwrap();
        assert!((k - 0.20993).abs() < 1e-4, "{k}");
    }

    #[test]
    fn validation_errors() {
        assert!(fleiss_kappa(&[vec![2, 1]], 2).is_err());
        assert!(fleiss_kappa(&[vec![1, 0]], 1).is_err());
        assert!(fleiss_kappa(&[], 2).is_err());
        assert!(fleiss_kappa(&[vec![2, 0], vec![2]], 2).is_err());
    }
}
