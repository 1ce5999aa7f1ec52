// Reading the browser selection as a code-point range into the letter.
//
// The letter container holds highlight elements, so a selection edge is a
// (node, UTF-16 offset) pair somewhere in the subtree. Flattening walks
// the text nodes in order; the conversion to code points happens on the
// full letter text, matching what the service stores.

import { CodePointRange, utf16RangeToCodePoints } from "./offsets.js";

/** UTF-16 offset of a selection boundary inside container's text. */
export function boundaryToUtf16(container: Node, node: Node, offset: number): number | null {
  if (!container.contains(node)) {
    return null;
  }
  if (node.nodeType !== Node.TEXT_NODE) {
    // The boundary sits between child elements: sum the text before it.
    let total = 0;
    for (let i = 0; i < offset; i++) {
      total += (node.childNodes[i]?.textContent ?? "").length;
    }
    return utf16OfNode(container, node) + total;
  }
  return utf16OfNode(container, node) + offset;
}

function utf16OfNode(container: Node, target: Node): number {
  let total = 0;
  const walker = document.createTreeWalker(container, NodeFilter.SHOW_TEXT);
  for (let text = walker.nextNode(); text; text = walker.nextNode()) {
    if (text === target || text.contains(target)) {
      return total;
    }
    // Stop once the walk passes the target element's position.
    if (target.compareDocumentPosition(text) & Node.DOCUMENT_POSITION_FOLLOWING) {
      return total;
    }
    total += (text.textContent ?? "").length;
  }
  return total;
}

/**
 * The current selection as a code-point range into `text`, or null when
 * the selection is collapsed or outside the container.
 */
export function selectionToRange(container: HTMLElement, text: string): CodePointRange | null {
  const selection = window.getSelection();
  if (!selection || selection.rangeCount === 0 || selection.isCollapsed) {
    return null;
  }
  const range = selection.getRangeAt(0);
  const start = boundaryToUtf16(container, range.startContainer, range.startOffset);
  const end = boundaryToUtf16(container, range.endContainer, range.endOffset);
  if (start === null || end === null || start === end) {
    return null;
  }
  return utf16RangeToCodePoints(text, start, end);
}
