/** Thin client over the calibration server's HTTP API. */

import type { ImageEntry, SkinThresholds, ViewMode } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async check(res: Response): Promise<Response> {
    if (!res.ok) {
      let detail = `${res.status}`;
      try {
        const body = (await res.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body; status alone will do */
      }
      throw new ApiError(res.status, detail);
    }
    return res;
  }

  async listImages(classFilter?: string): Promise<ImageEntry[]> {
    const params = new URLSearchParams({ limit: "1000" });
    if (classFilter) params.set("class", classFilter);
    const res = await this.check(
      await this.fetchImpl(`${this.baseUrl}/api/images?${params}`),
    );
    const body = (await res.json()) as { items: ImageEntry[] };
    return body.items;
  }

  previewUrl(id: number, thresholds: SkinThresholds, mode: ViewMode): string {
    const params = new URLSearchParams({
      id: String(id),
      mode,
      t: JSON.stringify(thresholds),
    });
    return `${this.baseUrl}/api/preview?${params}`;
  }

  /** Returns the preview PNG plus the server's skin-fraction readout. */
  async fetchPreview(
    id: number,
    thresholds: SkinThresholds,
    mode: ViewMode,
    signal?: AbortSignal,
  ): Promise<{ blob: Blob; skinFraction: number | null }> {
    const res = await this.check(
      await this.fetchImpl(this.previewUrl(id, thresholds, mode), { signal }),
    );
    const header = res.headers.get("x-skin-fraction");
    return {
      blob: await res.blob(),
      skinFraction: header === null ? null : Number(header),
    };
  }

  async listPresets(): Promise<string[]> {
    const res = await this.check(
      await this.fetchImpl(`${this.baseUrl}/api/presets`),
    );
    const body = (await res.json()) as { presets: string[] };
    return body.presets;
  }

  async loadPreset(name: string): Promise<SkinThresholds> {
    const res = await this.check(
      await this.fetchImpl(`${this.baseUrl}/api/presets/${name}`),
    );
    return (await res.json()) as SkinThresholds;
  }

  async savePreset(name: string, thresholds: SkinThresholds): Promise<void> {
    await this.check(
      await this.fetchImpl(`${this.baseUrl}/api/presets/${name}`, {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(thresholds),
      }),
    );
  }
}
