// Page/card layout: pages slide in on the right; when the open pages no
// longer fit the container width, the leftmost page is evicted. A page is a
// list of cards, a card a list of sections.

import type { Json } from './protocol.js';

export type Section =
  | { kind: 'text'; text: string }
  | { kind: 'media'; src: string; alt: string }
  | { kind: 'info'; src: string; text: string }
  | { kind: 'list'; items: ListItem[] }
  | { kind: 'category-list'; categories: string[]; items: (ListItem & { category: string })[] }
  | { kind: 'form'; element: HTMLElement }
  | { kind: 'model-picker'; element: HTMLElement };

export interface ListItem {
  id: string;
  label: string;
  onSelect?: (id: string) => void;
}

export interface Card {
  title: string;
  sections: Section[];
}

export interface Page {
  id: string;
  title: string;
  cards: Card[];
  width: number; // layout units; the container caps the sum
}

export class PageStack {
  private pages: Page[] = [];
  private listeners: Array<() => void> = [];

  constructor(readonly maxWidth: number) {}

  get openPages(): readonly Page[] {
    return this.pages;
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Open to the right; evict from the left until everything fits. */
  open(page: Page): void {
    this.pages = this.pages.filter((p) => p.id !== page.id);
    this.pages.push(page);
    while (this.pages.length > 1 && this.totalWidth() > this.maxWidth) {
      this.pages.shift();
    }
    this.notify();
  }

  /** Close a page and everything stacked to its right. */
  closeFrom(pageId: string): void {
    const index = this.pages.findIndex((p) => p.id === pageId);
    if (index >= 0) {
      this.pages = this.pages.slice(0, index);
      this.notify();
    }
  }

  replaceFrom(pageId: string, page: Page): void {
    this.closeFrom(pageId);
    this.open(page);
  }

  totalWidth(): number {
    return this.pages.reduce((sum, p) => sum + p.width, 0);
  }
}

// --- DOM rendering -----------------------------------------------------------

export function renderSection(section: Section): HTMLElement {
  const doc = document;
  switch (section.kind) {
    case 'text': {
      const el = doc.createElement('p');
      el.className = 'section section-text';
      el.textContent = section.text;
      return el;
    }
    case 'media': {
      const el = doc.createElement('img');
      el.className = 'section section-media';
      el.src = section.src;
      el.alt = section.alt;
      return el;
    }
    case 'info': {
      const el = doc.createElement('div');
      el.className = 'section section-info';
      const img = doc.createElement('img');
      img.src = section.src;
      const text = doc.createElement('p');
      text.textContent = section.text;
      el.append(img, text);
      return el;
    }
    case 'list': {
      const el = doc.createElement('ul');
      el.className = 'section section-list';
      for (const item of section.items) el.appendChild(renderListItem(item));
      return el;
    }
    case 'category-list': {
      const el = doc.createElement('div');
      el.className = 'section section-category-list';
      const filter = doc.createElement('select');
      const all = doc.createElement('option');
      all.value = '';
      all.textContent = 'all';
      filter.appendChild(all);
      for (const category of section.categories) {
        const option = doc.createElement('option');
        option.value = category;
        option.textContent = category;
        filter.appendChild(option);
      }
      const list = doc.createElement('ul');
      const refresh = () => {
        list.replaceChildren(
          ...section.items
            .filter((item) => !filter.value || item.category === filter.value)
            .map(renderListItem),
        );
      };
      filter.addEventListener('change', refresh);
      refresh();
      el.append(filter, list);
      return el;
    }
    case 'form':
    case 'model-picker':
      return section.element;
  }
}

function renderListItem(item: ListItem): HTMLElement {
  const li = document.createElement('li');
  const button = document.createElement('button');
  button.type = 'button';
  button.dataset['itemId'] = item.id;
  button.textContent = item.label;
  if (item.onSelect) button.addEventListener('click', () => item.onSelect!(item.id));
  li.appendChild(button);
  return li;
}

export function renderPage(page: Page): HTMLElement {
  const el = document.createElement('section');
  el.className = 'page';
  el.dataset['pageId'] = page.id;
  const heading = document.createElement('h2');
  heading.textContent = page.title;
  el.appendChild(heading);
  for (const card of page.cards) {
    const cardEl = document.createElement('article');
    cardEl.className = 'card';
    const title = document.createElement('h3');
    title.textContent = card.title;
    cardEl.appendChild(title);
    for (const section of card.sections) cardEl.appendChild(renderSection(section));
    el.appendChild(cardEl);
  }
  return el;
}

export function renderStack(stack: PageStack, container: HTMLElement): void {
  container.replaceChildren(...stack.openPages.map(renderPage));
}

export function jsonPreview(value: Record<string, Json> | null): string {
  return value ? JSON.stringify(value) : '(unset)';
}
