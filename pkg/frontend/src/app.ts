/**
 * Wires the calibration UI: threshold panel, live preview panes, preset
 * workflow, and the image browser.
 *
 * Preview updates are debounced (150 ms) and sequenced so only the newest
 * request's response ever renders; a network failure shows a banner and
 * keeps the last good preview on screen.
 */

import { ApiClient } from "./api.js";
import { debounce, LatestOnly } from "./debounce.js";
import { RangeSlider } from "./slider.js";
import { SessionStore } from "./state.js";
import {
  CHANNEL_DOMAINS,
  CHANNEL_LABELS,
  channelMayWrap,
  cloneThresholds,
  SPACE_LABELS,
  SPACES,
  validateThresholds,
  type SpaceName,
  type ViewMode,
} from "./types.js";

export const PREVIEW_DEBOUNCE_MS = 150;

export interface AppHandles {
  store: SessionStore;
  /** Forces an immediate (non-debounced) preview refresh; tests use it. */
  refreshNow: () => Promise<void>;
}

export function mountApp(
  doc: Document,
  root: HTMLElement,
  api: ApiClient,
  store: SessionStore = new SessionStore(),
): AppHandles {
  root.innerHTML = "";
  root.className = "calib-app";

  // ----- layout ---------------------------------------------------------
  const banner = el(doc, "div", "banner hidden");
  const panel = el(doc, "div", "threshold-panel");
  const previews = el(doc, "div", "previews");
  const originalPane = el(doc, "figure", "pane");
  const originalImg = doc.createElement("img");
  originalImg.alt = "original";
  originalPane.append(originalImg, caption(doc, "original"));
  const segPane = el(doc, "figure", "pane");
  const segImg = doc.createElement("img");
  segImg.alt = "preview";
  segPane.append(segImg, caption(doc, "preview"));
  previews.append(originalPane, segPane);

  const statusBar = el(doc, "div", "status-bar");
  const skinReadout = el(doc, "span", "skin-readout");
  const dirtyFlag = el(doc, "span", "dirty-flag");
  statusBar.append(skinReadout, dirtyFlag);

  const presetBar = el(doc, "div", "preset-bar");
  const browserBar = el(doc, "div", "browser-bar");
  root.append(banner, browserBar, previews, statusBar, panel, presetBar);

  // ----- threshold panel ------------------------------------------------
  const sliders = new Map<string, RangeSlider>();
  const enables = new Map<SpaceName, HTMLInputElement>();
  let hueWrapToggle: HTMLInputElement | null = null;

  for (const space of SPACES) {
    const fieldset = doc.createElement("fieldset");
    fieldset.className = `space space-${space}`;
    const legend = doc.createElement("legend");
    const enable = doc.createElement("input");
    enable.type = "checkbox";
    enable.checked = store.get().thresholds[space].enabled;
    enable.addEventListener("change", () => {
      const t = cloneThresholds(store.get().thresholds);
      t[space].enabled = enable.checked;
      syncSliderDisables(space, !enable.checked);
      store.update({ thresholds: t });
    });
    enables.set(space, enable);
    legend.append(enable, doc.createTextNode(` ${SPACE_LABELS[space]}`));
    fieldset.append(legend);

    CHANNEL_LABELS[space].forEach((chLabel, ci) => {
      const [max, step] = CHANNEL_DOMAINS[space][ci];
      const slider = new RangeSlider(doc, {
        label: chLabel,
        max,
        step,
        value: store.get().thresholds[space].channels[ci],
        allowWrap: channelMayWrap(space, ci) && store.get().hueWrap,
        disabled: !store.get().thresholds[space].enabled,
        onChange: (lo, hi) => {
          const t = cloneThresholds(store.get().thresholds);
          t[space].channels[ci] = [lo, hi];
          store.update({ thresholds: t });
        },
      });
      sliders.set(`${space}.${ci}`, slider);
      fieldset.append(slider.root);

      if (channelMayWrap(space, ci)) {
        const wrapLabel = doc.createElement("label");
        wrapLabel.className = "hue-wrap";
        hueWrapToggle = doc.createElement("input");
        hueWrapToggle.type = "checkbox";
        hueWrapToggle.checked = store.get().hueWrap;
        hueWrapToggle.addEventListener("change", () => {
          const on = hueWrapToggle!.checked;
          slider.setAllowWrap(on);
          store.update({ hueWrap: on });
        });
        wrapLabel.append(hueWrapToggle,
                         doc.createTextNode(" hue wraps past 0/360"));
        fieldset.append(wrapLabel);
      }
    });
    panel.append(fieldset);
  }

  // Smoothing controls.
  const smoothing = doc.createElement("fieldset");
  smoothing.className = "space smoothing";
  const smoothLegend = doc.createElement("legend");
  smoothLegend.textContent = "mask smoothing";
  const sigmaInput = doc.createElement("input");
  sigmaInput.type = "number";
  sigmaInput.min = "0";
  sigmaInput.step = "0.5";
  sigmaInput.value = String(store.get().thresholds.mask_smooth_sigma);
  sigmaInput.className = "sigma-input";
  sigmaInput.addEventListener("input", () => {
    const v = Math.max(0, Number(sigmaInput.value) || 0);
    const t = cloneThresholds(store.get().thresholds);
    t.mask_smooth_sigma = v;
    store.update({ thresholds: t });
  });
  const keepSlider = new RangeSlider(doc, {
    label: "keep",
    max: 1,
    step: 0.01,
    value: [0, store.get().thresholds.mask_keep_threshold],
    onChange: (_lo, hi) => {
      const t = cloneThresholds(store.get().thresholds);
      t.mask_keep_threshold = hi;
      store.update({ thresholds: t });
    },
  });
  smoothing.append(smoothLegend, labelWrap(doc, "sigma", sigmaInput),
                   keepSlider.root);
  panel.append(smoothing);

  function syncSliderDisables(space: SpaceName, disabled: boolean): void {
    for (let ci = 0; ci < 3; ci++) {
      sliders.get(`${space}.${ci}`)!.setDisabled(disabled);
    }
  }

  /** Push state back into the panel DOM (preset loads replace thresholds
   *  wholesale; sliders and checkboxes must follow). setValue never emits
   *  onChange, so this cannot loop. */
  function syncPanelFromState(): void {
    const t = store.get().thresholds;
    for (const space of SPACES) {
      enables.get(space)!.checked = t[space].enabled;
      syncSliderDisables(space, !t[space].enabled);
      t[space].channels.forEach(([lo, hi], ci) => {
        const slider = sliders.get(`${space}.${ci}`)!;
        const [curLo, curHi] = slider.value();
        if (curLo !== lo || curHi !== hi) slider.setValue(lo, hi);
      });
    }
    if (sigmaInput.value !== String(t.mask_smooth_sigma)
        && doc.activeElement !== sigmaInput) {
      sigmaInput.value = String(t.mask_smooth_sigma);
    }
    const [, keep] = keepSlider.value();
    if (keep !== t.mask_keep_threshold) {
      keepSlider.setValue(0, t.mask_keep_threshold);
    }
  }

  // ----- view mode + browser -------------------------------------------
  const modeSelect = doc.createElement("select");
  modeSelect.className = "mode-select";
  for (const mode of ["segmented", "mask", "original"] as ViewMode[]) {
    const opt = doc.createElement("option");
    opt.value = mode;
    opt.textContent = mode;
    modeSelect.append(opt);
  }
  modeSelect.addEventListener("change", () => {
    store.update({ viewMode: modeSelect.value as ViewMode });
  });

  const prevBtn = button(doc, "← prev", "prev-btn",
                         () => store.step(-1));
  const nextBtn = button(doc, "next →", "next-btn",
                         () => store.step(1));
  const classSelect = doc.createElement("select");
  classSelect.className = "class-select";
  classSelect.addEventListener("change", async () => {
    const filter = classSelect.value || null;
    try {
      const images = await api.listImages(filter ?? undefined);
      store.update({ classFilter: filter, images, currentIndex: 0 });
    } catch (err) {
      showBanner(`image list failed: ${String(err)}`);
    }
  });
  const imageCaption = el(doc, "span", "image-caption");
  browserBar.append(prevBtn, nextBtn, classSelect, modeSelect, imageCaption);

  // ----- preset workflow -------------------------------------------------
  const presetSelect = doc.createElement("select");
  presetSelect.className = "preset-select";
  const presetName = doc.createElement("input");
  presetName.type = "text";
  presetName.placeholder = "preset name";
  presetName.className = "preset-name";
  const saveBtn = button(doc, "save", "save-btn", async () => {
    const name = presetName.value.trim();
    if (!name) {
      showBanner("preset name required");
      return;
    }
    const problems = validateThresholds(store.get().thresholds);
    if (problems.length) {
      showBanner(problems.join("; "));
      return;
    }
    try {
      await api.savePreset(name, store.get().thresholds);
      store.markSaved(name);
      await refreshPresetList();
      hideBanner();
    } catch (err) {
      showBanner(`save failed: ${String(err)}`);
    }
  });
  const loadBtn = button(doc, "load", "load-btn", async () => {
    const name = presetSelect.value;
    if (!name) return;
    try {
      const t = await api.loadPreset(name);
      store.loadPreset(name, t);
      presetName.value = name;
      hideBanner();
    } catch (err) {
      showBanner(`load failed: ${String(err)}`);
    }
  });
  presetBar.append(presetSelect, loadBtn, presetName, saveBtn);

  async function refreshPresetList(): Promise<void> {
    const names = await api.listPresets();
    presetSelect.innerHTML = "";
    for (const n of names) {
      const opt = doc.createElement("option");
      opt.value = n;
      opt.textContent = n;
      presetSelect.append(opt);
    }
    const active = store.get().activePreset;
    if (active && names.includes(active)) presetSelect.value = active;
  }

  // ----- preview machinery ------------------------------------------------
  const previewGate = new LatestOnly<{ blob: Blob; skinFraction: number | null }>();
  let lastOriginalId: number | null = null;

  function showBanner(msg: string): void {
    banner.textContent = msg;
    banner.classList.remove("hidden");
  }
  function hideBanner(): void {
    banner.classList.add("hidden");
  }

  async function refreshPreview(): Promise<void> {
    const image = store.currentImage();
    if (!image) return;
    const { thresholds, viewMode } = store.get();
    if (validateThresholds(thresholds).length > 0) return; // never send invalid
    await previewGate.run(
      (signal) => api.fetchPreview(image.id, thresholds, viewMode, signal),
      ({ blob, skinFraction }) => {
        setImageFromBlob(segImg, blob);
        skinReadout.textContent = skinFraction === null
          ? ""
          : `skin: ${(skinFraction * 100).toFixed(1)}%`;
        hideBanner();
      },
      (err) => showBanner(`preview failed: ${String(err)}`),
    );
  }

  async function refreshOriginal(): Promise<void> {
    const image = store.currentImage();
    if (!image || image.id === lastOriginalId) return;
    lastOriginalId = image.id;
    try {
      const { blob } = await api.fetchPreview(image.id,
                                              store.get().thresholds,
                                              "original");
      setImageFromBlob(originalImg, blob);
    } catch (err) {
      showBanner(`original failed: ${String(err)}`);
    }
  }

  const debouncedPreview = debounce(() => {
    void refreshPreview();
  }, PREVIEW_DEBOUNCE_MS);

  store.subscribe((state) => {
    dirtyFlag.textContent = state.dirty ? "● unsaved changes" : "";
    const image = store.currentImage();
    imageCaption.textContent = image
      ? `#${image.id} ${image.filename} (${image.class})`
      : "no images";
    syncPanelFromState();
    void refreshOriginal();
    debouncedPreview();
  });

  // ----- initial load -----------------------------------------------------
  void (async () => {
    try {
      const images = await api.listImages();
      const classes = [...new Set(images.map((i) => i.class))].sort();
      classSelect.innerHTML = "";
      const all = doc.createElement("option");
      all.value = "";
      all.textContent = "all classes";
      classSelect.append(all);
      for (const c of classes) {
        const opt = doc.createElement("option");
        opt.value = c;
        opt.textContent = c;
        classSelect.append(opt);
      }
      await refreshPresetList();
      store.update({ images });
    } catch (err) {
      showBanner(`server unreachable: ${String(err)}`);
    }
  })();

  return { store, refreshNow: refreshPreview };
}

// ----- small DOM helpers ----------------------------------------------------

function el(doc: Document, tag: string, className: string): HTMLElement {
  const node = doc.createElement(tag);
  node.className = className;
  return node;
}

function caption(doc: Document, text: string): HTMLElement {
  const cap = doc.createElement("figcaption");
  cap.textContent = text;
  return cap;
}

function button(doc: Document, label: string, className: string,
                onClick: () => void): HTMLButtonElement {
  const btn = doc.createElement("button");
  btn.type = "button";
  btn.className = className;
  btn.textContent = label;
  btn.addEventListener("click", onClick);
  return btn;
}

function labelWrap(doc: Document, text: string,
                   input: HTMLElement): HTMLElement {
  const label = doc.createElement("label");
  label.append(doc.createTextNode(`${text} `), input);
  return label;
}

function setImageFromBlob(img: HTMLImageElement, blob: Blob): void {
  const URLImpl = (img.ownerDocument.defaultView ?? globalThis).URL;
  if (typeof URLImpl.createObjectURL !== "function") return; // test DOMs
  const url = URLImpl.createObjectURL(blob);
  const old = img.src;
  img.src = url;
  if (old.startsWith("blob:")) URLImpl.revokeObjectURL(old);
}
