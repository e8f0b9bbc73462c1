//! Minimal unsigned 256-bit integer support.
//!
//! The fixed-point layer needs exact widening multiplication and a full
//! 256-by-128 division so that `a * b / d` never loses bits in the
//! intermediate product. Only the operations actually used are implemented.
//! Everything here is differentially tested against `num-bigint`.

const M64: u128 = (1u128 << 64) - 1;

/// Unsigned 256-bit integer stored as two 128-bit halves.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct U256 {
    /// Most significant 128 bits.
    pub hi: u128,
    /// Least significant 128 bits.
    pub lo: u128,
}

impl U256 {
    pub const ZERO: U256 = U256 { hi: 0, lo: 0 };

    pub fn from_u128(v: u128) -> U256 {
        U256 { hi: 0, lo: v }
    }

    /// Full 128x128 -> 256 bit multiplication.
    pub fn mul_u128(a: u128, b: u128) -> U256 {
        let (ah, al) = (a >> 64, a & M64);
        let (bh, bl) = (b >> 64, b & M64);
        let ll = al * bl;
        let lh = al * bh;
        let hl = ah * bl;
        let hh = ah * bh;
        let (mid, mid_carry) = lh.overflowing_add(hl);
        let (lo, lo_carry) = ll.overflowing_add(mid << 64);
        let hi = hh + (mid >> 64) + ((mid_carry as u128) << 64) + lo_carry as u128;
        U256 { hi, lo }
    }

    pub fn checked_add(self, rhs: U256) -> Option<U256> {
        let (lo, c) = self.lo.overflowing_add(rhs.lo);
        let hi = self.hi.checked_add(rhs.hi)?.checked_add(c as u128)?;
        Some(U256 { hi, lo })
    }

    /// Subtraction; caller must guarantee `self >= rhs`.
    #[cfg(test)]
    pub fn sub(self, rhs: U256) -> U256 {
        debug_assert!(self >= rhs, "U256 subtraction underflow");
        let (lo, borrow) = self.lo.overflowing_sub(rhs.lo);
        let hi = self.hi - rhs.hi - borrow as u128;
        U256 { hi, lo }
    }

    pub fn shl(self, n: u32) -> U256 {
        if n == 0 {
            self
        } else if n >= 256 {
            U256::ZERO
        } else if n >= 128 {
            U256 { hi: self.lo << (n - 128), lo: 0 }
        } else {
            U256 { hi: (self.hi << n) | (self.lo >> (128 - n)), lo: self.lo << n }
        }
    }

    pub fn shr(self, n: u32) -> U256 {
        if n == 0 {
            self
        } else if n >= 256 {
            U256::ZERO
        } else if n >= 128 {
            U256 { hi: 0, lo: self.hi >> (n - 128) }
        } else {
            U256 { hi: self.hi >> n, lo: (self.lo >> n) | (self.hi << (128 - n)) }
        }
    }

    pub fn try_to_u128(self) -> Option<u128> {
        if self.hi == 0 {
            Some(self.lo)
        } else {
            None
        }
    }

    /// Divides by a 128-bit divisor, returning `(quotient, remainder)`.
    ///
    /// Panics on a zero divisor; a zero divisor is always a programming error
    /// in this crate.
    pub fn div_rem_u128(self, d: u128) -> (U256, u128) {
        assert!(d != 0, "division by zero");
        if self.hi == 0 {
            return (U256::from_u128(self.lo / d), self.lo % d);
        }
        if d <= M64 {
            self.div_rem_small(d)
        } else {
            self.div_rem_wide(d)
        }
    }

    /// Schoolbook division for divisors that fit in 64 bits.
    fn div_rem_small(self, d: u128) -> (U256, u128) {
        let limbs = [
            self.lo as u64,
            (self.lo >> 64) as u64,
            self.hi as u64,
            (self.hi >> 64) as u64,
        ];
        let mut q = [0u64; 4];
        let mut rem: u128 = 0;
        for i in (0..4).rev() {
            let cur = (rem << 64) | limbs[i] as u128;
            q[i] = (cur / d) as u64;
            rem = cur % d;
        }
        (
            U256 {
                hi: ((q[3] as u128) << 64) | q[2] as u128,
                lo: ((q[1] as u128) << 64) | q[0] as u128,
            },
            rem,
        )
    }

    /// Knuth algorithm D for divisors occupying 65..=128 bits.
    fn div_rem_wide(self, d: u128) -> (U256, u128) {
        let s = d.leading_zeros(); // 0..=63 because d >= 2^64
        let dn = d << s;
        let dn1 = (dn >> 64) as u64; // top bit set after normalization
        let dn0 = dn as u64;
        let dlimbs = [dn0, dn1];

        // Normalized dividend occupies at most five 64-bit limbs.
        let l = [
            self.lo as u64,
            (self.lo >> 64) as u64,
            self.hi as u64,
            (self.hi >> 64) as u64,
        ];
        let mut u = [0u64; 5];
        if s == 0 {
            u[..4].copy_from_slice(&l);
        } else {
            u[0] = l[0] << s;
            for i in 1..4 {
                u[i] = (l[i] << s) | (l[i - 1] >> (64 - s));
            }
            u[4] = l[3] >> (64 - s);
        }

        let mut q = [0u64; 3];
        for j in (0..3).rev() {
            let num = ((u[j + 2] as u128) << 64) | u[j + 1] as u128;
            debug_assert!(u[j + 2] <= dn1, "Knuth invariant violated");
            let (mut qhat, mut rhat) = if u[j + 2] == dn1 {
                let qh = M64;
                (qh, num.wrapping_sub(qh * dn1 as u128))
            } else {
                (num / dn1 as u128, num % dn1 as u128)
            };
            while rhat <= M64 && qhat * dn0 as u128 > ((rhat << 64) | u[j] as u128) {
                qhat -= 1;
                rhat += dn1 as u128;
            }

            // Multiply-and-subtract qhat * dn from the three-limb window.
            let mut borrow: u128 = 0;
            let mut carry: u128 = 0;
            for i in 0..2 {
                let p = qhat * dlimbs[i] as u128 + carry;
                carry = p >> 64;
                let plo = p & M64;
                let ui = u[j + i] as u128;
                if ui >= plo + borrow {
                    u[j + i] = (ui - plo - borrow) as u64;
                    borrow = 0;
                } else {
                    u[j + i] = (ui + (1u128 << 64) - plo - borrow) as u64;
                    borrow = 1;
                }
            }
            let top = u[j + 2] as u128;
            let need = carry + borrow;
            if top >= need {
                u[j + 2] = (top - need) as u64;
            } else {
                // Rare overshoot: decrement the estimate and add the divisor back.
                u[j + 2] = (top.wrapping_sub(need)) as u64;
                qhat -= 1;
                let mut c: u128 = 0;
                for i in 0..2 {
                    let t = u[j + i] as u128 + dlimbs[i] as u128 + c;
                    u[j + i] = t as u64;
                    c = t >> 64;
                }
                u[j + 2] = (u[j + 2] as u128).wrapping_add(c) as u64;
            }
            q[j] = qhat as u64;
        }

        let rem_normalized = ((u[1] as u128) << 64) | u[0] as u128;
        (
            U256 {
                hi: q[2] as u128,
                lo: ((q[1] as u128) << 64) | q[0] as u128,
            },
            rem_normalized >> s,
        )
    }
}
