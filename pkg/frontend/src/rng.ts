/**
 * Deterministic 64-bit random number generator.
 *
 * xoshiro256** seeded through splitmix64, in BigInt arithmetic so that the
 * stream is bit-identical to the Python core's generator (same seed, same
 * call sequence). Proxy-table sampling must match the core draw for draw,
 * so every sampling decision in this package flows through this class.
 *
 * References: Blackman & Vigna, "Scrambled linear pseudorandom number
 * generators" (xoshiro256**); Steele, Lea & Flood (splitmix64).
 */

const MASK64 = (1n << 64n) - 1n;

function splitmix64(state: bigint): [bigint, bigint] {
  state = (state + 0x9e3779b97f4a7c15n) & MASK64;
  let z = state;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  return [state, z ^ (z >> 31n)];
}

function rotl(x: bigint, k: bigint): bigint {
  return ((x << k) | (x >> (64n - k))) & MASK64;
}

export class Xoshiro256StarStar {
  private s: bigint[];

  constructor(seed: bigint | number) {
    let state = BigInt(seed) & MASK64;
    this.s = [];
    for (let i = 0; i < 4; i++) {
      const [next, out] = splitmix64(state);
      state = next;
      this.s.push(out);
    }
  }

  /** Next raw 64-bit output. */
  nextU64(): bigint {
    const s = this.s;
    const result = (rotl((s[1] * 5n) & MASK64, 7n) * 9n) & MASK64;
    const t = (s[1] << 17n) & MASK64;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45n);
    return result;
  }

  /** Uniform integer in [0, n), unbiased via rejection of the top remainder. */
  randbelow(n: number): number {
    if (n <= 0) {
      throw new RangeError('randbelow requires n >= 1');
    }
    if (n === 1) {
      return 0;
    }
    const bn = BigInt(n);
    const span = MASK64 + 1n;
    const limit = span - (span % bn);
    for (;;) {
      const u = this.nextU64();
      if (u < limit) {
        return Number(u % bn);
      }
    }
  }

  /** Uniform float in [0, 1) with 53 random bits. */
  uniform01(): number {
    return Number(this.nextU64() >> 11n) * 2 ** -53;
  }
}
