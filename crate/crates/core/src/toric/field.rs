use super::ToricError;

/// The prime field `F_q`, elements as integers in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u32,
}

/// Largest accepted modulus; products of two elements stay in `u64`.
pub const MAX_PRIME: u32 = 1 << 31;

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let q = q as u64;
    let mut d = 2u64;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self, ToricError> {
        if q > MAX_PRIME || !is_prime(q) {
            return Err(ToricError::NotPrime(q));
        }
        Ok(Self { q })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Reduces any integer into `[0, q)`.
    pub fn elem(&self, x: i64) -> u32 {
        x.rem_euclid(self.q as i64) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.q as u64) as u32
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.q as u64 - b as u64) % self.q as u64) as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        (a as u64 * b as u64 % self.q as u64) as u32
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.q;
        let mut acc = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a % self.q == 0 {
            None
        } else {
            Some(self.pow(a, self.q as u64 - 2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        for q in [2, 3, 5, 7, 11, 13, 65_537] {
            assert!(PrimeField::new(q).is_ok());
        }
        for q in [0, 1, 4, 9, 15, 65_535] {
            assert_eq!(PrimeField::new(q), Err(ToricError::NotPrime(q)));
        }
    }

    #[test]
    fn axioms_on_small_fields() {
        for q in [2, 3, 5, 7] {
            let f = PrimeField::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    for c in 0..q {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
            assert_eq!(f.inv(0), None);
        }
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.elem(-1), 6);
        assert_eq!(f.pow(3, 6), 1);
    }
}
