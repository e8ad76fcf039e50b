/** Code editor: a plain textarea next to a line-number gutter. Compile-error
 * lines are highlighted in the gutter so the student sees where to look
 * without any extra clicks. */

export interface Editor {
  root: HTMLElement;
  textarea: HTMLTextAreaElement;
  getCode(): string;
  setCode(code: string): void;
  setHighlights(lines: number[]): void;
  highlightedLines(): number[];
}

export function createEditor(doc: Document, initialCode = ""): Editor {
  const root = doc.createElement("div");
  root.className = "editor";
  root.setAttribute("data-testid", "editor");

  const gutter = doc.createElement("div");
  gutter.className = "editor-gutter";
  gutter.setAttribute("data-testid", "editor-gutter");

  const textarea = doc.createElement("textarea");
  textarea.className = "editor-input";
  textarea.setAttribute("data-testid", "editor-input");
  textarea.spellcheck = false;
  textarea.value = initialCode;

  root.append(gutter, textarea);

  let highlighted: number[] = [];

  function lineCount(): number {
    return textarea.value.split("\n").length;
  }

  function renderGutter(): void {
    gutter.textContent = "";
    const marked = new Set(highlighted);
    for (let line = 1; line <= lineCount(); line += 1) {
      const cell = doc.createElement("div");
      cell.className = marked.has(line) ? "gutter-line highlighted" : "gutter-line";
      cell.setAttribute("data-line", String(line));
      cell.textContent = String(line);
      gutter.appendChild(cell);
    }
  }

  textarea.addEventListener("input", renderGutter);
  renderGutter();

  return {
    root,
    textarea,
    getCode: () => textarea.value,
    setCode: (code) => {
      textarea.value = code;
      renderGutter();
    },
    setHighlights: (lines) => {
      highlighted = [...lines];
      renderGutter();
    },
    highlightedLines: () => [...highlighted],
  };
}
