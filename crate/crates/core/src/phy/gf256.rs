//! Arithmetic in GF(2^8) with primitive polynomial x^8 + x^4 + x^3 + x^2 + 1.

use std::sync::OnceLock;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut x: u16 = 1;
        for i in 0..255 {
            exp[i] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= 0x11D;
            }
        }
        for i in 255..512 {
            exp[i] = exp[i - 255];
        }
        Tables { exp, log }
    })
}

pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = tables();
    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
}

pub fn div(a: u8, b: u8) -> u8 {
    assert!(b != 0, "division by zero in GF(256)");
    if a == 0 {
        return 0;
    }
    let t = tables();
    t.exp[(t.log[a as usize] as usize + 255 - t.log[b as usize] as usize) % 255]
}

pub fn inv(a: u8) -> u8 {
    div(1, a)
}

/// `α^i` for any integer exponent.
pub fn pow_alpha(i: i64) -> u8 {
    tables().exp[i.rem_euclid(255) as usize]
}

pub fn log(a: u8) -> Option<u8> {
    (a != 0).then(|| tables().log[a as usize])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_exhaustive() {
        for a in 1..=255u8 {
            assert_eq!(mul(a, inv(a)), 1);
            for b in [1u8, 2, 3, 0x53, 0xCA, 255] {
                assert_eq!(div(mul(a, b), b), a);
                assert_eq!(mul(a, b), mul(b, a));
            }
        }
        assert_eq!(pow_alpha(255), 1);
        assert_eq!(pow_alpha(8), 0x1D);
    }
}
