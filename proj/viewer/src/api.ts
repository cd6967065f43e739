// Types for the browser client. The server serves the built-in viewer from
// include/vtour/builtin_viewer.hpp; a TypeScript build can replace it through
// `vtour compile --viewer <dir>`.

export type HotspotKind = "picture" | "video" | "text" | "link";

export interface InitialView {
  yaw_deg: number;
  pitch_deg: number;
  fov_deg: number;
}

export interface Hotspot {
  id: string;
  kind: HotspotKind;
  yaw_deg: number;
  pitch_deg: number;
  title: string;
  /** picture: media reference, video: external URL, text: inline text, link: scene id */
  payload: string;
}

export interface Scene {
  id: string;
  title: string;
  panorama: string;
  initial_view: InitialView;
  hotspots: Hotspot[];
}

/** Body of GET /api/tour. */
export interface Tour {
  id: string;
  title: string;
  start_scene: string;
  scenes: Scene[];
}

/** Body of every non-2xx API response. */
export interface ApiError {
  code: "not_found" | "invalid_parameter" | "integrity" | "io" | "internal";
  message: string;
}

export type CubeFace = "px" | "nx" | "py" | "ny" | "pz" | "nz";

export const endpoints = {
  tour: () => "/api/tour",
  pano: (scene: string) => `/api/scene/${encodeURIComponent(scene)}/pano`,
  preview: (scene: string) => `/api/scene/${encodeURIComponent(scene)}/preview`,
  cubemap: (scene: string, face: CubeFace) => `/api/scene/${encodeURIComponent(scene)}/cubemap/${face}`,
  view: (scene: string, v: { yaw_deg: number; pitch_deg: number; fov_deg: number; w: number; h: number }) =>
    `/api/scene/${encodeURIComponent(scene)}/view?yaw_deg=${v.yaw_deg}&pitch_deg=${v.pitch_deg}` +
    `&fov_deg=${v.fov_deg}&w=${v.w}&h=${v.h}`,
  media: (ref: string) => `/api/media/${ref.split("/").map(encodeURIComponent).join("/")}`,
  metrics: () => "/api/metrics",
} as const;

export const FOV_MIN_DEG = 30;
export const FOV_MAX_DEG = 110;

export interface ViewerState {
  scene: string;
  yaw_deg: number;
  pitch_deg: number;
  fov_deg: number;
  overlay: string | null;
  loading: boolean;
}

export interface Viewer {
  loadTour(baseUrl: string): Promise<void>;
  loadScene(id: string): Promise<void>;
  setView(yaw_deg: number, pitch_deg: number, fov_deg: number): void;
  activateHotspot(id: string): void;
  readonly state: ViewerState;
}
