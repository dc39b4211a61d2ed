use num_complex::Complex64;

/// Transitive-closure clustering: `x ~ y` when `|x - y| <= tol * scale`,
/// `scale = max(1, max |v|)`. Clusters are returned as index lists, each
/// sorted, ordered by their smallest index.
pub fn cluster(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    assert!(tol > 0.0, "cluster tolerance must be positive");
    let n = values.len();
    let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let eps = tol * scale;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Cluster real values, returning `(representative, members)` with the mean as representative.
pub fn cluster_real(values: &[f64], tol: f64) -> Vec<(f64, Vec<usize>)> {
    let c: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    cluster(&c, tol)
        .into_iter()
        .map(|g| (g.iter().map(|&i| values[i]).sum::<f64>() / g.len() as f64, g))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn near_zero_pair() {
        let g = cluster(&[c(0.0), c(1e-12), c(5.0)], 1e-9);
        assert_eq!(g, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn all_equal() {
        assert_eq!(cluster(&[c(2.0); 4], 1e-9).len(), 1);
    }

    #[test]
    fn chained() {
        let step = 0.5e-9;
        let g = cluster(&[c(0.0), c(step), c(2.0 * step)], 1e-9);
        assert_eq!(g, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn order_independent() {
        let a = cluster(&[c(5.0), c(1e-12), c(0.0)], 1e-9);
        assert_eq!(a, vec![vec![0], vec![1, 2]]);
    }
}
