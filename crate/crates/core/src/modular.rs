//! Linear congruences over `Z_m`.

/// Nonnegative residue of `a` modulo `m`.
pub fn reduce(a: i64, m: u32) -> u32 {
    a.rem_euclid(i64::from(m)) as u32
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Returns `(g, s, t)` with `a*s + b*t = g = gcd(a, b)`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    (old_r, old_s, old_t)
}

/// Solution set of `a * s ≡ b (mod m)`, `m ≥ 1`.
///
/// When a solution exists, the solutions form one residue class modulo
/// `m / g`, `g = gcd(a, m)`, i.e. exactly `g` values in `[0, m)`; `a ≡ 0`
/// gives `g = m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Solutions {
    first: u32,
    step: u32,
    count: u32,
}

impl Solutions {
    pub fn len(&self) -> usize {
        self.count as usize
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        let Solutions { first, step, count } = *self;
        (0..count).map(move |k| first + k * step)
    }
}

pub fn solve_linear(a: i64, b: i64, m: u32) -> Solutions {
    debug_assert!(m >= 1);
    let a = reduce(a, m) as i64;
    let b = reduce(b, m) as i64;
    let mi = i64::from(m);
    let (g, inv, _) = ext_gcd(a, mi);
    if b % g != 0 {
        return Solutions {
            first: 0,
            step: 0,
            count: 0,
        };
    }
    let step = mi / g;
    let first = ((b / g) % step * inv.rem_euclid(step)).rem_euclid(step);
    Solutions {
        first: first as u32,
        step: step as u32,
        count: g as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_coefficient_has_one_solution() {
        let s: Vec<_> = solve_linear(1, 7, 10).iter().collect();
        assert_eq!(s, vec![7]);
        let s: Vec<_> = solve_linear(-1, 3, 10).iter().collect();
        assert_eq!(s, vec![7]);
    }

    #[test]
    fn zero_coefficient() {
        assert_eq!(solve_linear(0, 0, 4).iter().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert!(solve_linear(0, 1, 4).is_empty());
        assert_eq!(solve_linear(5, 3, 1).iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn shared_factor() {
        assert_eq!(solve_linear(2, 4, 10).iter().collect::<Vec<_>>(), vec![2, 7]);
        assert!(solve_linear(2, 3, 10).is_empty());
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in -40i64..40, b in -40i64..40, m in 1u32..30) {
            let fast: Vec<u32> = solve_linear(a, b, m).iter().collect();
            let slow: Vec<u32> = (0..m)
                .filter(|&s| reduce(a * i64::from(s) - b, m) == 0)
                .collect();
            prop_assert_eq!(fast, slow);
        }
    }
}
