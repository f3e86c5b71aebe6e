//! Fixed-width bit rows used for subset states.

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[inline]
pub(crate) fn set(row: &mut [u64], i: usize) {
    row[i >> 6] |= 1 << (i & 63);
}

#[inline]
pub(crate) fn get(row: &[u64], i: usize) -> bool {
    row[i >> 6] >> (i & 63) & 1 == 1
}

#[inline]
pub(crate) fn or_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= s;
    }
}

#[inline]
pub(crate) fn is_empty(row: &[u64]) -> bool {
    row.iter().all(|&w| w == 0)
}

#[inline]
pub(crate) fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

/// Iterates the indices of set bits in ascending order.
pub(crate) fn ones(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &bits)| {
        let mut b = bits;
        std::iter::from_fn(move || {
            if b == 0 {
                return None;
            }
            let t = b.trailing_zeros() as usize;
            b &= b - 1;
            Some(w * 64 + t)
        })
    })
}

pub(crate) fn from_indices(n: usize, idx: impl IntoIterator<Item = usize>) -> Vec<u64> {
    let mut row = vec![0; words_for(n)];
    for i in idx {
        set(&mut row, i);
    }
    row
}

#[inline]
pub(crate) fn hash_words(row: &[u64]) -> u64 {
    // FxHash-style multiply-rotate mixing; subset rows are not adversarial.
    let mut h: u64 = 0;
    for &w in row {
        h = (h.rotate_left(5) ^ w).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }
    h
}
