/** Hint markup rendering. The server sanitizes hints down to text plus bare
 * <code> spans; the UI still builds DOM nodes itself so anything else that
 * ever slipped through renders as inert text, never as markup. */

const CODE_TAG = /<\/?code>/gi;

export function renderHintMarkup(doc: Document, markup: string): DocumentFragment {
  const fragment = doc.createDocumentFragment();
  let inCode = false;
  let last = 0;
  for (const match of markup.matchAll(CODE_TAG)) {
    const text = markup.slice(last, match.index);
    if (text) appendSegment(doc, fragment, text, inCode);
    inCode = match[0].toLowerCase() === "<code>";
    last = match.index + match[0].length;
  }
  const tail = markup.slice(last);
  if (tail) appendSegment(doc, fragment, tail, inCode);
  return fragment;
}

function appendSegment(
  doc: Document,
  fragment: DocumentFragment,
  text: string,
  inCode: boolean,
): void {
  const decoded = decodeEntities(text);
  if (inCode) {
    const code = doc.createElement("code");
    code.textContent = decoded;
    fragment.appendChild(code);
  } else {
    fragment.appendChild(doc.createTextNode(decoded));
  }
}

/** The server escapes & < > ; undo exactly those so text reads naturally. */
function decodeEntities(text: string): string {
  return text
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&amp;/g, "&");
}
