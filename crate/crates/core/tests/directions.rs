use relax2d::roc::directions;

/// Two nonzero integer 4-vectors are parallel iff all 2×2 minors vanish.
fn parallel(x: [i64; 4], y: [i64; 4]) -> bool {
    (0..4).all(|i| (0..4).all(|j| x[i] * y[j] - x[j] * y[i] == 0))
}

/// Count of pairwise non-parallel `a ⊗ b`, `a, b ∈ ℤ² \ {0}`, `|a|_∞, |b|_∞ ≤ l`.
fn brute_force_count(l: i64) -> usize {
    let mut reps: Vec<[i64; 4]> = Vec::new();
    for a1 in -l..=l {
        for a2 in -l..=l {
            for b1 in -l..=l {
                for b2 in -l..=l {
                    if (a1, a2) == (0, 0) || (b1, b2) == (0, 0) {
                        continue;
                    }
                    let m = [a1 * b1, a1 * b2, a2 * b1, a2 * b2];
                    if !reps.iter().any(|r| parallel(*r, m)) {
                        reps.push(m);
                    }
                }
            }
        }
    }
    reps.len()
}

#[test]
fn first_order_direction_count_matches_enumeration() {
    let oracle = brute_force_count(1);
    assert_eq!(oracle, 16);
    assert_eq!(directions(1).len(), oracle);
}

#[test]
fn second_order_direction_count_matches_enumeration() {
    assert_eq!(directions(2).len(), brute_force_count(2));
}

#[test]
fn directions_are_rank_one_and_pairwise_non_parallel() {
    for l in 1..=2 {
        let d = directions(l);
        let ents: Vec<[i64; 4]> = d.iter().map(|r| r.entries().map(|e| e as i64)).collect();
        for (i, x) in ents.iter().enumerate() {
            assert_eq!(x[0] * x[3] - x[1] * x[2], 0);
            assert!(x.iter().any(|&e| e != 0));
            for y in &ents[i + 1..] {
                assert!(!parallel(*x, *y), "{x:?} ∥ {y:?}");
            }
        }
    }
}

#[test]
fn canonical_shear_direction_is_present() {
    let d = directions(1);
    assert!(d.iter().any(|r| r.entries() == [0, 1, 0, 0]));
}
