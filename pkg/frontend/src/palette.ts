// The label palette: schema labels, shared minted subjects, and the two
// fixed kinds. Minting goes through the service so a subject created in
// one session is immediately offered to every other one on its next
// refresh.

import { ApiClient, NewSubject, Palette } from "./api.js";

export class PaletteStore {
  private readonly api: ApiClient;
  private palette: Palette | null = null;

  constructor(api: ApiClient) {
    this.api = api;
  }

  async refresh(): Promise<Palette> {
    this.palette = await this.api.getLabels();
    return this.palette;
  }

  get current(): Palette {
    if (!this.palette) {
      throw new Error("palette not loaded yet");
    }
    return this.palette;
  }

  /** Every assignable rendered label, fixed kinds first. */
  renderedLabels(): string[] {
    const p = this.current;
    return [
      ...p.other,
      ...p.schema_labels.map((l) => l.rendered),
      ...p.new_subjects.map((s) => s.rendered),
    ];
  }

  has(rendered: string): boolean {
    return this.renderedLabels().includes(rendered);
  }

  /**
   * Mint a new subject and refresh. Returns the entry, which may predate
   * this call: minting an existing name is idempotent on the server.
   */
  async mint(name: string, annotatorId: string): Promise<NewSubject> {
    const entry = await this.api.mintLabel(name, annotatorId);
    await this.refresh();
    return entry;
  }
}
