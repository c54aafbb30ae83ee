import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { mountApp, PREVIEW_DEBOUNCE_MS } from "../src/app.js";

const PNG_STUB = new Uint8Array([0x89, 0x50, 0x4e, 0x47]);

interface Call {
  url: string;
  at: number;
}

function fakeServer(overrides: { failPreviews?: boolean } = {}) {
  const calls: Call[] = [];
  const fetchImpl = async (url: string): Promise<Response> => {
    calls.push({ url, at: performance.now() });
    if (url.includes("/api/images")) {
      return Response.json({
        total: 2,
        items: [
          { id: 0, filename: "a.png", class: "c0" },
          { id: 1, filename: "b.png", class: "c1" },
        ],
      });
    }
    if (url.includes("/api/preview")) {
      if (overrides.failPreviews && url.includes("segmented")) {
        return new Response("boom", { status: 500 });
      }
      return new Response(PNG_STUB, {
        headers: { "Content-Type": "image/png", "X-Skin-Fraction": "0.1234" },
      });
    }
    if (url.includes("/api/presets")) {
      return Response.json({ presets: [] });
    }
    return new Response("not found", { status: 404 });
  };
  return { calls, fetchImpl };
}

const sleep = (ms: number) => new Promise((res) => setTimeout(res, ms));

async function waitFor(cond: () => boolean, ms = 2000): Promise<void> {
  const start = performance.now();
  while (!cond()) {
    if (performance.now() - start > ms) throw new Error("waitFor timeout");
    await sleep(10);
  }
}

function previewCalls(calls: Call[], mode = "segmented"): Call[] {
  return calls.filter(
    (c) => c.url.includes("/api/preview") && c.url.includes(`mode=${mode}`),
  );
}

describe("mountApp", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "";
    root = document.createElement("div");
    document.body.append(root);
  });

  it("loads images and renders an initial preview", async () => {
    const { calls, fetchImpl } = fakeServer();
    mountApp(document, root, new ApiClient("", fetchImpl));
    await waitFor(() => previewCalls(calls).length >= 1);
    expect(root.querySelector(".image-caption")!.textContent).toContain(
      "a.png",
    );
    expect(root.querySelector(".skin-readout")!.textContent).toContain(
      "12.3%",
    );
  });

  it("slider drags debounce into a single preview request", async () => {
    const { calls, fetchImpl } = fakeServer();
    mountApp(document, root, new ApiClient("", fetchImpl));
    await waitFor(() => previewCalls(calls).length >= 1);
    await sleep(PREVIEW_DEBOUNCE_MS * 2);
    const before = previewCalls(calls).length;

    const lo = root.querySelector(
      ".space-rgb .range-lo",
    ) as HTMLInputElement;
    for (const v of [10, 20, 30, 40]) {
      lo.value = String(v);
      lo.dispatchEvent(new Event("input", { bubbles: true }));
      await sleep(20); // scrubbing faster than the debounce window
    }
    await waitFor(() => previewCalls(calls).length === before + 1);
    await sleep(PREVIEW_DEBOUNCE_MS * 2);
    expect(previewCalls(calls).length).toBe(before + 1);
    const last = previewCalls(calls).at(-1)!;
    const t = JSON.parse(
      new URL(last.url, "http://x").searchParams.get("t")!,
    ) as { rgb: { channels: [number, number][] } };
    expect(t.rgb.channels[0][0]).toBe(40); // final slider state won
  });

  it("toggling a space off disables its sliders and refreshes", async () => {
    const { calls, fetchImpl } = fakeServer();
    mountApp(document, root, new ApiClient("", fetchImpl));
    await waitFor(() => previewCalls(calls).length >= 1);
    const before = previewCalls(calls).length;
    const enable = root.querySelector(
      ".space-hsv legend input",
    ) as HTMLInputElement;
    enable.checked = true;
    enable.dispatchEvent(new Event("change", { bubbles: true }));
    await waitFor(() => previewCalls(calls).length > before);
    const hueLo = root.querySelector(
      ".space-hsv .range-lo",
    ) as HTMLInputElement;
    expect(hueLo.disabled).toBe(false);
    enable.checked = false;
    enable.dispatchEvent(new Event("change", { bubbles: true }));
    await sleep(PREVIEW_DEBOUNCE_MS * 2);
    expect(hueLo.disabled).toBe(true);
  });

  it("network failure shows the banner and keeps the last readout", async () => {
    const server = fakeServer();
    let fail = false;
    const flaky = async (url: string, init?: RequestInit) => {
      if (fail && url.includes("mode=segmented")) {
        return new Response("boom", { status: 500 });
      }
      return server.fetchImpl(url);
    };
    mountApp(document, root, new ApiClient("", flaky));
    await waitFor(() => previewCalls(server.calls).length >= 1);
    await waitFor(
      () =>
        root
          .querySelector(".skin-readout")!
          .textContent!.includes("12.3%"),
    );
    fail = true;
    const lo = root.querySelector(
      ".space-rgb .range-lo",
    ) as HTMLInputElement;
    lo.value = "33";
    lo.dispatchEvent(new Event("input", { bubbles: true }));
    await waitFor(
      () => !root.querySelector(".banner")!.classList.contains("hidden"),
    );
    // Last good readout stays on screen while the banner reports the error.
    expect(root.querySelector(".skin-readout")!.textContent).toContain(
      "12.3%",
    );
  });

  it("dirty flag appears on edit and clears on save", async () => {
    const { calls, fetchImpl } = fakeServer();
    const handles = mountApp(document, root, new ApiClient("", fetchImpl));
    await waitFor(() => previewCalls(calls).length >= 1);
    expect(root.querySelector(".dirty-flag")!.textContent).toBe("");
    const lo = root.querySelector(
      ".space-rgb .range-lo",
    ) as HTMLInputElement;
    lo.value = "15";
    lo.dispatchEvent(new Event("input", { bubbles: true }));
    expect(root.querySelector(".dirty-flag")!.textContent).toContain(
      "unsaved",
    );
    handles.store.markSaved("tuned");
    expect(root.querySelector(".dirty-flag")!.textContent).toBe("");
  });

  it("browsing images keeps thresholds fixed", async () => {
    const { calls, fetchImpl } = fakeServer();
    const handles = mountApp(document, root, new ApiClient("", fetchImpl));
    await waitFor(() => previewCalls(calls).length >= 1);
    const lo = root.querySelector(
      ".space-rgb .range-lo",
    ) as HTMLInputElement;
    lo.value = "77";
    lo.dispatchEvent(new Event("input", { bubbles: true }));
    const before = JSON.stringify(handles.store.get().thresholds);
    (root.querySelector(".next-btn") as HTMLButtonElement).click();
    await waitFor(() =>
      root.querySelector(".image-caption")!.textContent!.includes("b.png"),
    );
    expect(JSON.stringify(handles.store.get().thresholds)).toBe(before);
  });
});
