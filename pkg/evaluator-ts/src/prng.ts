/**
 * Portable seeded randomness, bit-compatible with the Python optimizer's
 * noise stream: splitmix64 finalizer for seed mixing, xorshift64* for
 * uniforms, Box-Muller (first variate only) for normals. All integer work
 * happens on 64-bit BigInt values; uniforms use 53 bits so every value is
 * exact in a double.
 */

const MASK64 = (1n << 64n) - 1n;

/** splitmix64 finalizer: bijective scramble of a 64-bit integer. */
export function mix64(x: bigint): bigint {
  x &= MASK64;
  x ^= x >> 30n;
  x = (x * 0xbf58476d1ce4e5b9n) & MASK64;
  x ^= x >> 27n;
  x = (x * 0x94d049bb133111ebn) & MASK64;
  x ^= x >> 31n;
  return x;
}

export class Xorshift64Star {
  private state: bigint;

  constructor(seed: bigint) {
    // mix64 output 0 would freeze the xorshift state
    this.state = mix64(seed) || 0x9e3779b97f4a7c15n;
  }

  nextU64(): bigint {
    let x = this.state;
    x ^= x >> 12n;
    x = (x ^ (x << 25n)) & MASK64;
    x ^= x >> 27n;
    this.state = x;
    return (x * 0x2545f4914f6cdd1dn) & MASK64;
  }

  /** Uniform draw in (0, 1] with 53-bit resolution. */
  uniform(): number {
    return Number((this.nextU64() >> 11n) + 1n) * 2 ** -53;
  }

  /** Standard normal draw: Box-Muller, first variate only. */
  normal(): number {
    const u1 = this.uniform();
    const u2 = this.uniform();
    return Math.sqrt(-2.0 * Math.log(u1)) * Math.cos(2.0 * Math.PI * u2);
  }
}

/** One standard-normal draw fully determined by the seed. */
export function seededNormal(seed: bigint): number {
  return new Xorshift64Star(seed).normal();
}
