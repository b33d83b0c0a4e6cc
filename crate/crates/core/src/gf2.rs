//! Bit-packed linear algebra over GF(2).

/// Rank over GF(2) of a set of equal-length bit-vectors packed into `u64` words.
///
/// Bit `j` of a row lives in word `j / 64`, position `j % 64`.
pub fn gf2_rank(rows: &[Vec<u64>]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let words = first.len();
    assert!(rows.iter().all(|r| r.len() == words), "rows must have equal length");
    let mut buf: Vec<u64> = rows.iter().flatten().copied().collect();
    rank_in_place(&mut buf, rows.len(), words)
}

/// Row-reduces a flat `rows × words` buffer in place and returns its rank.
pub fn rank_in_place(buf: &mut [u64], rows: usize, words: usize) -> usize {
    debug_assert_eq!(buf.len(), rows * words);
    let mut rank = 0;
    for w in 0..words {
        let mut remaining_bits = u64::MAX;
        loop {
            if rank == rows {
                return rank;
            }
            // Lowest still-unpivoted bit of word `w` present in any unreduced row.
            let mut pivot = None;
            let mut best = 64;
            for r in rank..rows {
                let v = buf[r * words + w] & remaining_bits;
                if v != 0 {
                    let t = v.trailing_zeros();
                    if t < best {
                        best = t;
                        pivot = Some(r);
                        if t == 0 {
                            break;
                        }
                    }
                }
            }
            let Some(p) = pivot else { break };
            let bit = 1u64 << best;
            remaining_bits &= !(bit | (bit - 1));
            if p != rank {
                for k in 0..words {
                    buf.swap(p * words + k, rank * words + k);
                }
            }
            let (head, tail) = buf.split_at_mut((rank + 1) * words);
            let prow = &head[rank * words..];
            for row in tail.chunks_exact_mut(words) {
                if row[w] & bit != 0 {
                    for k in w..words {
                        row[k] ^= prow[k];
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Solves `Σ_j c_j · a_j = b` for a coefficient vector `c`, where the `a_j`
/// are the columns of the system.
///
/// `equations` holds one packed row per equation (bit `j` = coefficient of
/// unknown `j`) together with its right-hand side. Returns `None` when the
/// system is inconsistent.
pub fn solve(mut equations: Vec<(Vec<u64>, bool)>, unknowns: usize) -> Option<Vec<u64>> {
    let words = crate::pauli::words_for(unknowns);
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..unknowns {
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..equations.len()).find(|&r| equations[r].0[w] & b != 0) else {
            continue;
        };
        equations.swap(p, rank);
        let (prow, prhs) = equations[rank].clone();
        for (r, (row, rhs)) in equations.iter_mut().enumerate() {
            if r != rank && row[w] & b != 0 {
                for k in 0..words {
                    row[k] ^= prow[k];
                }
                *rhs ^= prhs;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if equations[rank..].iter().any(|(_, rhs)| *rhs) {
        return None;
    }
    let mut sol = vec![0u64; words];
    for (r, &col) in pivots.iter().enumerate() {
        if equations[r].1 {
            sol[col / 64] |= 1 << (col % 64);
        }
    }
    Some(sol)
}
