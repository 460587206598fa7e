use serde::Serialize;

/// Unit-cost edit distance with the operation counts of one canonical backtrace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EditOps {
    pub distance: usize,
    pub replace: usize,
    pub insert: usize,
    pub delete: usize,
}

/// Character Levenshtein distance turning `a` into `b`.
///
/// Ties in the backtrace prefer replace, then insert, then delete, so the
/// op counts are reproducible.
pub fn levenshtein(a: &str, b: &str) -> EditOps {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_seq(&a, &b)
}

pub fn levenshtein_seq<T: PartialEq>(a: &[T], b: &[T]) -> EditOps {
    let (m, n) = (a.len(), b.len());
    let w = n + 1;
    let mut dp = vec![0usize; (m + 1) * w];
    for i in 0..=m {
        dp[i * w] = i;
    }
    for (j, cell) in dp.iter_mut().enumerate().take(n + 1) {
        *cell = j;
    }
    for i in 1..=m {
        for j in 1..=n {
            let diag = dp[(i - 1) * w + j - 1] + usize::from(a[i - 1] != b[j - 1]);
            dp[i * w + j] = diag
                .min(dp[(i - 1) * w + j] + 1)
                .min(dp[i * w + j - 1] + 1);
        }
    }

    let mut ops = EditOps {
        distance: dp[m * w + n],
        ..EditOps::default()
    };
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let here = dp[i * w + j];
        if i > 0 && j > 0 {
            let differ = a[i - 1] != b[j - 1];
            if here == dp[(i - 1) * w + j - 1] + usize::from(differ) {
                ops.replace += usize::from(differ);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && here == dp[i * w + j - 1] + 1 {
            ops.insert += 1;
            j -= 1;
        } else {
            ops.delete += 1;
            i -= 1;
        }
    }
    ops
}
