use crate::mat2::Mat2;

/// An integer rank-one matrix `a ⊗ b` with primitive `a, b ∈ ℤ²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RankOneDirection {
    pub a: [i32; 2],
    pub b: [i32; 2],
}

impl RankOneDirection {
    /// Integer entries `(a₁b₁, a₁b₂, a₂b₁, a₂b₂)`.
    pub fn entries(&self) -> [i32; 4] {
        [
            self.a[0] * self.b[0],
            self.a[0] * self.b[1],
            self.a[1] * self.b[0],
            self.a[1] * self.b[1],
        ]
    }

    /// The direction as a matrix, scaled by `scale` (the grid width at use sites).
    pub fn matrix(&self, scale: f64) -> Mat2 {
        let e = self.entries();
        Mat2::new(e[0] as f64, e[1] as f64, e[2] as f64, e[3] as f64) * scale
    }
}

/// Rank-one directions, pairwise non-parallel, in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    pub dirs: Vec<RankOneDirection>,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RankOneDirection> {
        self.dirs.iter()
    }
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Representative of `{±s·M}`: entries divided by their gcd, first nonzero positive.
fn normalize(entries: [i32; 4]) -> [i32; 4] {
    let g = entries.iter().fold(0, |g, &e| gcd(g, e));
    let sign = entries.iter().find(|&&e| e != 0).map_or(1, |e| e.signum());
    entries.map(|e| e / g * sign)
}

/// Splits a normalized rank-one integer matrix back into primitive factors.
fn factor(m: [i32; 4]) -> RankOneDirection {
    let rows = [[m[0], m[1]], [m[2], m[3]]];
    let row = rows.iter().find(|r| r[0] != 0 || r[1] != 0).copied().unwrap();
    let g = gcd(row[0], row[1]);
    let b = [row[0] / g, row[1] / g];
    let j = if b[0] != 0 { 0 } else { 1 };
    let a = [rows[0][j] / b[j], rows[1][j] / b[j]];
    RankOneDirection { a, b }
}

/// All `a ⊗ b` with `a, b ∈ ℤ² \ {0}`, `|a|_∞, |b|_∞ ≤ order`, identified up to
/// sign and scaling.
///
/// Ordered by the entry sum `Σ|mᵢⱼ|`, then lexicographically descending, so
/// the four single-entry directions come first.
pub fn directions(order: u32) -> DirectionSet {
    assert!(order >= 1, "direction order must be at least 1");
    let l = order as i32;
    let mut seen: Vec<[i32; 4]> = Vec::new();
    for a1 in -l..=l {
        for a2 in -l..=l {
            for b1 in -l..=l {
                for b2 in -l..=l {
                    if (a1, a2) == (0, 0) || (b1, b2) == (0, 0) {
                        continue;
                    }
                    let m = normalize([a1 * b1, a1 * b2, a2 * b1, a2 * b2]);
                    if !seen.contains(&m) {
                        seen.push(m);
                    }
                }
            }
        }
    }
    seen.sort_by(|x, y| {
        let sx: i32 = x.iter().map(|e| e.abs()).sum();
        let sy: i32 = y.iter().map(|e| e.abs()).sum();
        sx.cmp(&sy).then_with(|| y.cmp(x))
    });
    DirectionSet {
        dirs: seen.into_iter().map(factor).collect(),
    }
}
