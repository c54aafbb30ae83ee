/**
 * Calibration session state: one source of truth the panels subscribe to.
 * Every mutation goes through update(), which stamps the dirty flag and
 * notifies listeners; thresholds are validated by construction (slider
 * clamping), so subscribers may fire requests without re-checking.
 */

import {
  cloneThresholds,
  defaultThresholds,
  type ImageEntry,
  type SkinThresholds,
  type ViewMode,
} from "./types.js";

export interface SessionState {
  images: ImageEntry[];
  currentIndex: number;
  thresholds: SkinThresholds;
  viewMode: ViewMode;
  activePreset: string | null;
  dirty: boolean;
  classFilter: string | null;
  /** Wrap toggle for the hue slider; when off, hue clamps like the rest. */
  hueWrap: boolean;
}

export type Listener = (state: SessionState) => void;

export function initialState(): SessionState {
  return {
    images: [],
    currentIndex: 0,
    thresholds: defaultThresholds(),
    viewMode: "segmented",
    activePreset: null,
    dirty: false,
    classFilter: null,
    hueWrap: false,
  };
}

export class SessionStore {
  private state: SessionState;
  private listeners: Listener[] = [];

  constructor(state: SessionState = initialState()) {
    this.state = state;
  }

  get(): SessionState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of [...this.listeners]) fn(this.state);
  }

  /** Merge a partial state; any threshold change marks the session dirty. */
  update(patch: Partial<SessionState>): void {
    const touchesThresholds = patch.thresholds !== undefined;
    this.state = { ...this.state, ...patch };
    if (touchesThresholds) this.state.dirty = true;
    this.emit();
  }

  /** Replace thresholds wholesale (preset load): clears the dirty flag. */
  loadPreset(name: string, thresholds: SkinThresholds): void {
    this.state = {
      ...this.state,
      thresholds: cloneThresholds(thresholds),
      activePreset: name,
      dirty: false,
    };
    this.emit();
  }

  /** After a successful save the current state is the preset. */
  markSaved(name: string): void {
    this.state = { ...this.state, activePreset: name, dirty: false };
    this.emit();
  }

  currentImage(): ImageEntry | null {
    return this.state.images[this.state.currentIndex] ?? null;
  }

  /** Step through the image list; thresholds are left untouched. */
  step(delta: number): void {
    const n = this.state.images.length;
    if (n === 0) return;
    const idx = (this.state.currentIndex + delta + n) % n;
    this.update({ currentIndex: idx });
  }
}
