// Offset conversion between the DOM's UTF-16 world and the annotation
// service's code-point world.
//
// The service stores span offsets in Unicode code points, end exclusive.
// Browser selections and string indexing speak UTF-16 code units, where
// anything outside the basic plane (music notation, emoji) occupies two
// units. Every offset that crosses the API boundary goes through here.

/** Number of code points in the string. */
export function codePointLength(text: string): number {
  let n = 0;
  for (let i = 0; i < text.length; n++) {
    i += isHighSurrogate(text, i) ? 2 : 1;
  }
  return n;
}

/** Convert a code-point offset to the equivalent UTF-16 offset. */
export function codePointToUtf16(text: string, cp: number): number {
  if (cp < 0 || !Number.isInteger(cp)) {
    throw new RangeError(`invalid code-point offset ${cp}`);
  }
  let i = 0;
  for (let seen = 0; seen < cp; seen++) {
    if (i >= text.length) {
      throw new RangeError(`code-point offset ${cp} past end of text`);
    }
    i += isHighSurrogate(text, i) ? 2 : 1;
  }
  return i;
}

/**
 * Convert a UTF-16 offset to the equivalent code-point offset.
 *
 * An offset that lands between the two halves of a surrogate pair (a
 * selection edge can, via keyboard tricks) snaps back to the start of the
 * pair rather than splitting a character.
 */
export function utf16ToCodePoint(text: string, u16: number): number {
  if (u16 < 0 || u16 > text.length || !Number.isInteger(u16)) {
    throw new RangeError(`invalid UTF-16 offset ${u16}`);
  }
  let cp = 0;
  for (let i = 0; i < u16; cp++) {
    const step = isHighSurrogate(text, i) ? 2 : 1;
    if (i + step > u16) {
      // u16 splits a pair; snap to the pair's start.
      return cp;
    }
    i += step;
  }
  return cp;
}

export interface CodePointRange {
  start: number;
  end: number;
}

/**
 * Convert a possibly reversed UTF-16 selection to an ordered code-point
 * range. Collapsed selections come back as an empty range.
 */
export function utf16RangeToCodePoints(
  text: string,
  anchor: number,
  focus: number
): CodePointRange {
  const a = utf16ToCodePoint(text, anchor);
  const b = utf16ToCodePoint(text, focus);
  return a <= b ? { start: a, end: b } : { start: b, end: a };
}

/** The substring covered by a code-point range. */
export function sliceByCodePoints(text: string, start: number, end: number): string {
  return text.slice(codePointToUtf16(text, start), codePointToUtf16(text, end));
}

// True when positions i, i+1 hold a well-formed surrogate pair. Lone
// surrogates count as one code point, matching how Python's len() sees
// the same text on the service side.
function isHighSurrogate(text: string, i: number): boolean {
  const high = text.charCodeAt(i);
  if (high < 0xd800 || high > 0xdbff || i + 1 >= text.length) {
    return false;
  }
  const low = text.charCodeAt(i + 1);
  return low >= 0xdc00 && low <= 0xdfff;
}
