// Offset conversions, exercised on text where UTF-16 and code-point
// indexing genuinely disagree: umlauts and the euro sign are single
// units, the musical clef and the violin are surrogate pairs.

import { describe, expect, it } from "vitest";

import {
  codePointLength,
  codePointToUtf16,
  sliceByCodePoints,
  utf16RangeToCodePoints,
  utf16ToCodePoint,
} from "../src/offsets.js";

const TEXT = "Grüße aus Köln: 5.000 € für 𝄞 und 🎻 bitte.";
const CHARS = [...TEXT];

describe("codePointLength", () => {
  it("counts characters, not UTF-16 units", () => {
    expect(codePointLength(TEXT)).toBe(CHARS.length);
    expect(TEXT.length).toBe(CHARS.length + 2); // two surrogate pairs
  });

  it("handles empty and ascii strings", () => {
    expect(codePointLength("")).toBe(0);
    expect(codePointLength("abc")).toBe(3);
  });

  it("counts a lone surrogate as one code point, like len() server-side", () => {
    expect(codePointLength("a\ud834b")).toBe(3);
    expect(codePointLength("a\ud834")).toBe(2);
  });
});

describe("codePointToUtf16 and utf16ToCodePoint", () => {
  it("round-trips every code-point boundary", () => {
    for (let cp = 0; cp <= CHARS.length; cp++) {
      const u16 = codePointToUtf16(TEXT, cp);
      expect(TEXT.slice(0, u16)).toBe(CHARS.slice(0, cp).join(""));
      expect(utf16ToCodePoint(TEXT, u16)).toBe(cp);
    }
  });

  it("rejects offsets out of range", () => {
    expect(() => codePointToUtf16(TEXT, CHARS.length + 1)).toThrow(RangeError);
    expect(() => codePointToUtf16(TEXT, -1)).toThrow(RangeError);
    expect(() => utf16ToCodePoint(TEXT, TEXT.length + 1)).toThrow(RangeError);
    expect(() => utf16ToCodePoint(TEXT, -1)).toThrow(RangeError);
  });

  it("snaps a boundary inside a surrogate pair to the pair's start", () => {
    const clefU16 = TEXT.indexOf("𝄞");
    const clefCp = utf16ToCodePoint(TEXT, clefU16);
    expect(utf16ToCodePoint(TEXT, clefU16 + 1)).toBe(clefCp);
    expect(utf16ToCodePoint(TEXT, clefU16 + 2)).toBe(clefCp + 1);
  });
});

describe("utf16RangeToCodePoints", () => {
  it("orders reversed selections", () => {
    const range = utf16RangeToCodePoints(TEXT, 5, 2);
    expect(range).toEqual({ start: 2, end: 5 });
  });

  it("maps a selection around the violin to one code point", () => {
    const u16 = TEXT.indexOf("🎻");
    const range = utf16RangeToCodePoints(TEXT, u16, u16 + 2);
    expect(range.end - range.start).toBe(1);
    expect(sliceByCodePoints(TEXT, range.start, range.end)).toBe("🎻");
  });
});

describe("sliceByCodePoints", () => {
  it("agrees with character-array slicing everywhere", () => {
    for (let start = 0; start <= CHARS.length; start++) {
      for (let end = start; end <= CHARS.length; end++) {
        expect(sliceByCodePoints(TEXT, start, end)).toBe(CHARS.slice(start, end).join(""));
      }
    }
  });
});
