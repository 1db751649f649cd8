//! Index subsets and their canonical ordering.

use std::cmp::Ordering;

/// Hard limit on enumerated side length (masks are `u32`).
pub const MAX_ENUMERATION_BITS: usize = 24;

pub fn mask_to_indices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

pub fn indices_to_indicator(idx: &[usize], n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &i in idx {
        v[i] = 1.0;
    }
    v
}

/// Compares two sorted index sets as the integers `sum_i 2^i`.
pub fn cmp_subsets(a: &[usize], b: &[usize]) -> Ordering {
    let mut ia = a.iter().rev();
    let mut ib = b.iter().rev();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Equal => continue,
                other => return other,
            },
        }
    }
}

/// Lexicographic comparison of tuples of subsets.
pub fn cmp_subset_tuples(a: &[Vec<usize>], b: &[Vec<usize>]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match cmp_subsets(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Sums of `values` over every mask in `0..2^n`, built by peeling the lowest bit.
pub fn subset_sums(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut sums = vec![0.0; 1usize << n];
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + values[low];
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_matches_mask_value() {
        for a in 1u64..64 {
            for b in 1u64..64 {
                let sa = mask_to_indices(a, 6);
                let sb = mask_to_indices(b, 6);
                assert_eq!(cmp_subsets(&sa, &sb), a.cmp(&b));
            }
        }
    }

    #[test]
    fn subset_sums_match_direct() {
        let v = [1.5, -2.0, 0.25, 4.0];
        let sums = subset_sums(&v);
        for mask in 0u64..16 {
            let direct: f64 = mask_to_indices(mask, 4).iter().map(|&i| v[i]).sum();
            assert_eq!(sums[mask as usize], direct);
        }
    }
}
