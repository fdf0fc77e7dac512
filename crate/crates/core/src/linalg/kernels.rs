//! Inner loops of the modular elimination.

use crate::arith::modp::{PrimeField, DEFAULT_PRIME};

/// `dst += c * src (mod p)` elementwise.
pub fn axpy(fp: &PrimeField, dst: &mut [u32], src: &[u32], c: u32) {
    debug_assert_eq!(dst.len(), src.len());
    if fp.p() == DEFAULT_PRIME {
        #[cfg(target_arch = "x86_64")]
        {
            if std::is_x86_feature_detected!("avx512f") {
                return unsafe { axpy_mersenne_avx512(dst, src, c) };
            }
            if std::is_x86_feature_detected!("avx2") {
                return unsafe { axpy_mersenne_avx2(dst, src, c) };
            }
        }
        axpy_mersenne(dst, src, c)
    } else {
        axpy_generic(fp, dst, src, c)
    }
}

/// `dst += c0 * s0 + c1 * s1 + c2 * s2 (mod p)` with a single reduction.
pub fn axpy3(fp: &PrimeField, dst: &mut [u32], s: [&[u32]; 3], c: [u32; 3]) {
    if fp.p() == DEFAULT_PRIME {
        #[cfg(target_arch = "x86_64")]
        {
            if std::is_x86_feature_detected!("avx512f") {
                return unsafe { axpy3_mersenne_avx512(dst, s, c) };
            }
            if std::is_x86_feature_detected!("avx2") {
                return unsafe { axpy3_mersenne_avx2(dst, s, c) };
            }
        }
        axpy3_mersenne(dst, s, c)
    } else {
        for i in 0..3 {
            axpy_generic(fp, dst, s[i], c[i]);
        }
    }
}

#[inline(always)]
fn axpy3_mersenne(dst: &mut [u32], s: [&[u32]; 3], c: [u32; 3]) {
    const P: u64 = DEFAULT_PRIME;
    let n = dst.len();
    let (s0, s1, s2) = (&s[0][..n], &s[1][..n], &s[2][..n]);
    let (c0, c1, c2) = (c[0] as u64, c[1] as u64, c[2] as u64);
    for i in 0..n {
        // < 2^31 + 3 * 2^62 < 2^64
        let x = dst[i] as u64 + c0 * s0[i] as u64 + c1 * s1[i] as u64 + c2 * s2[i] as u64;
        let x = (x & P) + (x >> 31);
        let x = (x & P) + (x >> 31);
        dst[i] = (if x >= P { x - P } else { x }) as u32;
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn axpy3_mersenne_avx2(dst: &mut [u32], s: [&[u32]; 3], c: [u32; 3]) {
    axpy3_mersenne(dst, s, c)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn axpy3_mersenne_avx512(dst: &mut [u32], s: [&[u32]; 3], c: [u32; 3]) {
    axpy3_mersenne(dst, s, c)
}

pub fn scale(fp: &PrimeField, dst: &mut [u32], c: u32) {
    for x in dst.iter_mut() {
        *x = fp.mul(*x as u64, c as u64) as u32;
    }
}

#[inline(always)]
fn axpy_mersenne(dst: &mut [u32], src: &[u32], c: u32) {
    const P: u64 = DEFAULT_PRIME;
    let c = c as u64;
    for (d, &s) in dst.iter_mut().zip(src) {
        let x = *d as u64 + c * s as u64;
        let x = (x & P) + (x >> 31);
        let x = (x & P) + (x >> 31);
        *d = (if x >= P { x - P } else { x }) as u32;
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn axpy_mersenne_avx2(dst: &mut [u32], src: &[u32], c: u32) {
    axpy_mersenne(dst, src, c)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn axpy_mersenne_avx512(dst: &mut [u32], src: &[u32], c: u32) {
    axpy_mersenne(dst, src, c)
}

fn axpy_generic(fp: &PrimeField, dst: &mut [u32], src: &[u32], c: u32) {
    let p = fp.p();
    let c = c as u64;
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = ((*d as u64 + c * s as u64) % p) as u32;
    }
}
