/**
 * Float-to-decimal formatting matching the consuming core's CSV convention:
 * integral values below 1e16 print as plain integers, everything else as the
 * shortest decimal string that round-trips, in CPython's repr layout.
 * Embedding files must re-emit byte-identically after a load/save cycle on
 * the core side, so the exponent threshold and padding rules matter.
 */

/** CPython float repr: shortest round-trip digits, fixed notation for
 * decimal exponents in [-4, 16), otherwise scientific with a sign and a
 * two-digit-minimum exponent. */
export function pyFloatRepr(x: number): string {
  if (Number.isNaN(x)) {
    return 'nan';
  }
  if (!Number.isFinite(x)) {
    return x > 0 ? 'inf' : '-inf';
  }
  if (x === 0) {
    return Object.is(x, -0) ? '-0.0' : '0.0';
  }
  // toExponential() without an argument uses exactly the digits needed to
  // round-trip, the same digit string CPython's repr derives
  const parts = Math.abs(x)
    .toExponential()
    .match(/^(\d)(?:\.(\d+))?e([+-]\d+)$/);
  if (!parts) {
    throw new Error(`unexpected exponential form for ${x}`);
  }
  const digits = parts[1] + (parts[2] ?? '');
  const exp = parseInt(parts[3], 10);
  let body: string;
  if (exp >= 16 || exp < -4) {
    const mantissa = parts[2] ? `${parts[1]}.${parts[2]}` : parts[1];
    const sign = exp < 0 ? '-' : '+';
    body = `${mantissa}e${sign}${String(Math.abs(exp)).padStart(2, '0')}`;
  } else if (exp >= digits.length - 1) {
    body = digits + '0'.repeat(exp - (digits.length - 1)) + '.0';
  } else if (exp >= 0) {
    body = `${digits.slice(0, exp + 1)}.${digits.slice(exp + 1)}`;
  } else {
    body = `0.${'0'.repeat(-exp - 1)}${digits}`;
  }
  return x < 0 ? `-${body}` : body;
}

/** CSV cell formatting: integer form when exact, repr form otherwise. */
export function formatFloat(x: number): string {
  if (Number.isFinite(x) && Number.isInteger(x) && Math.abs(x) < 1e16) {
    return x === 0 ? '0' : String(x);
  }
  return pyFloatRepr(x);
}
