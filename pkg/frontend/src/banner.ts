// Non-blocking error banner: shows the latest failure, dismisses on
// click, and never prevents further interaction.

export class Banner {
  readonly root: HTMLDivElement;

  constructor(doc: Document) {
    this.root = doc.createElement("div");
    this.root.className = "banner";
    this.root.style.display = "none";
    this.root.addEventListener("click", () => this.clear());
  }

  show(message: string): void {
    this.root.textContent = message;
    this.root.style.display = "block";
  }

  clear(): void {
    this.root.textContent = "";
    this.root.style.display = "none";
  }

  get message(): string | null {
    return this.root.style.display === "none" ? null : this.root.textContent;
  }
}
