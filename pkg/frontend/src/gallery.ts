// Step gallery: one figure per server step, prompt text under each
// image so the per-step prompt grammar stays visible.

import type { GalleryStep } from "./state";

export function renderGallery(container: HTMLElement, steps: GalleryStep[]): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  steps.forEach((step, index) => {
    const figure = doc.createElement("figure");
    figure.className = "gallery-step";

    const img = doc.createElement("img");
    img.src = `data:image/png;base64,${step.image}`;
    img.alt = `step ${index}`;
    figure.appendChild(img);

    const caption = doc.createElement("figcaption");
    caption.textContent = `${index}. ${step.prompt}`;
    figure.appendChild(caption);

    container.appendChild(figure);
  });
}
