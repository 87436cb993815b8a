/// Hypothesis split into one piece per reference segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resegmentation {
    /// `cuts[k]..cuts[k + 1]` is the hypothesis span of reference `k`;
    /// `cuts[0] == 0` and the last entry is the hypothesis length.
    pub cuts: Vec<usize>,
    pub distance: usize,
}

impl Resegmentation {
    pub fn segments<'a, T>(&self, hyp: &'a [T]) -> Vec<&'a [T]> {
        self.cuts.windows(2).map(|w| &hyp[w[0]..w[1]]).collect()
    }
}

/// Word-level Levenshtein distance.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for x in a {
        let mut diag = row[0];
        row[0] += 1;
        for (j, y) in b.iter().enumerate() {
            let sub = diag + usize::from(x != y);
            diag = row[j + 1];
            row[j + 1] = sub.min(diag + 1).min(row[j] + 1);
        }
    }
    row[b.len()]
}

/// Distances from `reference` to `hyp[..j]` for every `j`.
fn prefix_distances<T: PartialEq>(hyp: &[T], reference: &[T]) -> Vec<usize> {
    // column DP over the reference, advancing one hypothesis word at a time
    let mut col: Vec<usize> = (0..=reference.len()).collect();
    let mut out = Vec::with_capacity(hyp.len() + 1);
    out.push(col[reference.len()]);
    for x in hyp {
        let mut prev_diag = col[0];
        col[0] += 1;
        for (i, y) in reference.iter().enumerate() {
            let sub = prev_diag + usize::from(x != y);
            prev_diag = col[i + 1];
            col[i + 1] = sub.min(prev_diag + 1).min(col[i] + 1);
        }
        out.push(col[reference.len()]);
    }
    out
}

/// Split `hyp` into `refs.len()` contiguous, possibly empty pieces with the
/// least total edit distance. Among optimal splits the lexicographically
/// smallest cut vector wins, so ties go to earlier cuts.
pub fn mwer_resegment<T: PartialEq>(hyp: &[T], refs: &[Vec<T>]) -> Resegmentation {
    let n = hyp.len();
    let k = refs.len();
    if k == 0 {
        return Resegmentation { cuts: vec![0], distance: 0 };
    }
    // best[r][i]: least cost of covering hyp[i..] with refs[r..]
    let mut best = vec![vec![usize::MAX; n + 1]; k + 1];
    best[k][n] = 0;
    for r in (0..k).rev() {
        let reference = &refs[r];
        for i in 0..=n {
            let mut col: Vec<usize> = (0..=reference.len()).collect();
            let mut m = best[r + 1][i].saturating_add(reference.len());
            for (len, x) in hyp[i..].iter().enumerate() {
                // column minima never decrease, so nothing past here can beat m
                if col.iter().min().is_some_and(|&c| c >= m) {
                    break;
                }
                let mut prev_diag = col[0];
                col[0] += 1;
                for (j, y) in reference.iter().enumerate() {
                    let sub = prev_diag + usize::from(x != y);
                    prev_diag = col[j + 1];
                    col[j + 1] = sub.min(prev_diag + 1).min(col[j] + 1);
                }
                let rest = best[r + 1][i + len + 1];
                if rest != usize::MAX {
                    m = m.min(col[reference.len()] + rest);
                }
            }
            best[r][i] = m;
        }
    }
    let mut cuts = vec![0];
    let mut i = 0;
    for (r, reference) in refs.iter().enumerate() {
        let dist = prefix_distances(&hyp[i..], reference);
        let target = best[r][i];
        let len = (0..dist.len())
            .find(|&len| best[r + 1][i + len] != usize::MAX && dist[len] + best[r + 1][i + len] == target)
            .expect("an optimal piece exists");
        i += len;
        cuts.push(i);
    }
    Resegmentation { cuts, distance: best[0][0] }
}
