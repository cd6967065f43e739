#pragma once

// Minimal browser client shipped inside every bundle unless a separate viewer
// directory is supplied at compile time. It draws server-side renders from the
// /view endpoint, overlays hotspot icons and navigates between scenes.

#include <array>
#include <string_view>
#include <utility>

namespace vtour::builtin_viewer {

inline constexpr std::string_view kIndexHtml = R"(<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<title>Virtual tour</title>
<link rel="stylesheet" href="/viewer/viewer.css">
</head>
<body>
<header><h1 id="tour-title">Loading tour</h1><span id="scene-title"></span></header>
<main id="stage" tabindex="0">
  <img id="frame" alt="" draggable="false">
  <div id="hotspots"></div>
  <div id="overlay" hidden><button id="overlay-close" aria-label="Close">&times;</button><div id="overlay-body"></div></div>
  <div id="error" hidden><p id="error-text"></p><button id="retry">Retry</button></div>
</main>
<nav id="scenes"></nav>
<footer>Drag or use the arrow keys to look around. Wheel or +/- to zoom.</footer>
<script src="/viewer/viewer.js"></script>
</body>
</html>
)";

inline constexpr std::string_view kViewerCss = R"(* { box-sizing: border-box; }
body { margin: 0; font-family: system-ui, sans-serif; background: #1d1f21; color: #eee; display: flex; flex-direction: column; height: 100vh; }
header { padding: 8px 14px; display: flex; gap: 16px; align-items: baseline; }
header h1 { font-size: 18px; margin: 0; }
#stage { position: relative; flex: 1; overflow: hidden; cursor: grab; outline: none; }
#stage.dragging { cursor: grabbing; }
#frame { width: 100%; height: 100%; display: block; user-select: none; }
#hotspots { position: absolute; inset: 0; pointer-events: none; }
.hotspot { position: absolute; width: 34px; height: 34px; margin: -17px 0 0 -17px; border-radius: 50%; border: 2px solid #fff;
  background: #d22; color: #fff; font-size: 16px; line-height: 30px; text-align: center; pointer-events: auto; cursor: pointer; padding: 0; }
.hotspot:hover { background: #f33; }
#overlay { position: absolute; inset: 8% 12%; background: rgba(10, 10, 10, 0.92); border-radius: 6px; padding: 36px 18px 18px; overflow: auto; }
#overlay img, #overlay iframe { max-width: 100%; width: 100%; border: 0; }
#overlay iframe { aspect-ratio: 16 / 9; }
#overlay-close { position: absolute; top: 6px; right: 10px; background: none; border: 0; color: #fff; font-size: 24px; cursor: pointer; }
#error { position: absolute; inset: 30% 25%; background: #5a1d1d; padding: 18px; border-radius: 6px; text-align: center; }
#scenes { display: flex; gap: 8px; padding: 8px; overflow-x: auto; background: #111; }
#scenes button { background: none; border: 2px solid transparent; color: #ccc; padding: 2px; cursor: pointer; font-size: 12px; }
#scenes button.current { border-color: #d22; }
#scenes img { width: 96px; height: 96px; display: block; }
footer { font-size: 12px; color: #999; padding: 4px 14px; }
)";

inline constexpr std::string_view kViewerJs = R"((function () {
  "use strict";
  var GLYPHS = { picture: "\u{1F5BC}", video: "▶", text: "i", link: "➔" };
  var FOV_MIN = 30, FOV_MAX = 110;
  var stage = document.getElementById("stage");
  var frame = document.getElementById("frame");
  var layer = document.getElementById("hotspots");
  var overlay = document.getElementById("overlay");
  var overlayBody = document.getElementById("overlay-body");
  var errorBox = document.getElementById("error");
  var tour = null, scene = null;
  var view = { yaw: 0, pitch: 0, fov: 90 };
  var token = 0, pending = null;

  function wrapYaw(y) { y = ((y + 180) % 360 + 360) % 360 - 180; return y; }
  function clamp(v, lo, hi) { return Math.min(hi, Math.max(lo, v)); }
  function rad(d) { return d * Math.PI / 180; }

  function showError(text, retry) {
    document.getElementById("error-text").textContent = text;
    errorBox.hidden = false;
    document.getElementById("retry").onclick = function () { errorBox.hidden = true; retry(); };
  }

  function size() {
    var r = stage.getBoundingClientRect();
    return { w: Math.max(1, Math.min(2048, Math.round(r.width))), h: Math.max(1, Math.min(2048, Math.round(r.height))) };
  }

  // Screen position of a direction for the current view; null when behind the camera.
  function project(yawDeg, pitchDeg, w, h) {
    var y = rad(yawDeg) - rad(view.yaw), p = rad(pitchDeg), vp = rad(view.pitch);
    var dx = Math.cos(p) * Math.cos(y), dy = Math.cos(p) * Math.sin(y), dz = Math.sin(p);
    var x = dx * Math.cos(vp) + dz * Math.sin(vp);
    var z = -dx * Math.sin(vp) + dz * Math.cos(vp);
    if (x <= 1e-6) return null;
    var halfW = Math.tan(rad(view.fov) / 2), halfH = halfW * h / w;
    return { x: (dy / x / halfW + 1) * w / 2, y: (1 - z / x / halfH) * h / 2 };
  }

  function drawHotspots() {
    var s = size();
    layer.innerHTML = "";
    (scene.hotspots || []).forEach(function (hs) {
      var pos = project(hs.yaw_deg, hs.pitch_deg, s.w, s.h);
      if (!pos || pos.x < -20 || pos.y < -20 || pos.x > s.w + 20 || pos.y > s.h + 20) return;
      var b = document.createElement("button");
      b.className = "hotspot " + hs.kind;
      b.title = hs.title || hs.id;
      b.textContent = GLYPHS[hs.kind] || "?";
      b.style.left = pos.x + "px";
      b.style.top = pos.y + "px";
      b.onclick = function (e) { e.stopPropagation(); activate(hs); };
      layer.appendChild(b);
    });
  }

  function render() {
    if (!scene) return;
    drawHotspots();
    if (pending) return;
    pending = requestAnimationFrame(function () {
      pending = null;
      var s = size();
      var q = "yaw_deg=" + view.yaw.toFixed(3) + "&pitch_deg=" + view.pitch.toFixed(3) +
        "&fov_deg=" + view.fov.toFixed(3) + "&w=" + s.w + "&h=" + s.h;
      frame.src = "/api/scene/" + encodeURIComponent(scene.id) + "/view?" + q;
    });
  }

  frame.onerror = function () {
    var id = scene && scene.id;
    showError("Could not load the panorama for scene " + id + ".", function () { loadScene(id); });
  };

  function loadScene(id) {
    var mine = ++token;
    var next = tour.scenes.find(function (s) { return s.id === id; });
    if (!next) { showError("Unknown scene " + id + ".", function () { loadScene(tour.start_scene); }); return; }
    fetch("/api/scene/" + encodeURIComponent(id) + "/preview", { method: "HEAD" }).then(function (r) {
      if (mine !== token) return;
      if (!r.ok) throw new Error("HTTP " + r.status);
      scene = next;
      var iv = scene.initial_view || {};
      view = { yaw: iv.yaw_deg || 0, pitch: iv.pitch_deg || 0, fov: clamp(iv.fov_deg || 90, FOV_MIN, FOV_MAX) };
      overlay.hidden = true;
      errorBox.hidden = true;
      document.getElementById("scene-title").textContent = scene.title || scene.id;
      Array.prototype.forEach.call(document.querySelectorAll("#scenes button"), function (b) {
        b.classList.toggle("current", b.dataset.scene === id);
      });
      render();
    }).catch(function (e) {
      if (mine === token) showError("Could not load scene " + id + " (" + e.message + ").", function () { loadScene(id); });
    });
  }

  function activate(hs) {
    if (hs.kind === "link") { loadScene(hs.payload); return; }
    overlayBody.innerHTML = "";
    var h = document.createElement("h2");
    h.textContent = hs.title || hs.id;
    overlayBody.appendChild(h);
    if (hs.kind === "picture") {
      var img = document.createElement("img");
      img.alt = hs.title || "";
      img.onerror = function () { overlayBody.appendChild(document.createTextNode("The picture could not be loaded.")); };
      img.src = "/api/media/" + hs.payload.split("/").map(encodeURIComponent).join("/");
      overlayBody.appendChild(img);
    } else if (hs.kind === "video") {
      var f = document.createElement("iframe");
      f.src = hs.payload;
      f.allow = "autoplay; encrypted-media; fullscreen";
      overlayBody.appendChild(f);
    } else {
      var p = document.createElement("p");
      p.textContent = hs.payload;
      overlayBody.appendChild(p);
    }
    overlay.hidden = false;
  }

  document.getElementById("overlay-close").onclick = function () { overlay.hidden = true; };

  var drag = null;
  stage.addEventListener("pointerdown", function (e) {
    if (e.target !== frame) return;
    drag = { x: e.clientX, y: e.clientY };
    stage.classList.add("dragging");
    stage.setPointerCapture(e.pointerId);
  });
  stage.addEventListener("pointermove", function (e) {
    if (!drag) return;
    var degPerPx = view.fov / size().w;
    view.yaw = wrapYaw(view.yaw - (e.clientX - drag.x) * degPerPx);
    view.pitch = clamp(view.pitch + (e.clientY - drag.y) * degPerPx, -90, 90);
    drag = { x: e.clientX, y: e.clientY };
    render();
  });
  stage.addEventListener("pointerup", function () { drag = null; stage.classList.remove("dragging"); });
  stage.addEventListener("wheel", function (e) {
    e.preventDefault();
    view.fov = clamp(view.fov * Math.exp(e.deltaY * 0.001), FOV_MIN, FOV_MAX);
    render();
  }, { passive: false });
  stage.addEventListener("keydown", function (e) {
    var step = view.fov / 12;
    if (e.key === "ArrowLeft") view.yaw = wrapYaw(view.yaw - step);
    else if (e.key === "ArrowRight") view.yaw = wrapYaw(view.yaw + step);
    else if (e.key === "ArrowUp") view.pitch = clamp(view.pitch + step, -90, 90);
    else if (e.key === "ArrowDown") view.pitch = clamp(view.pitch - step, -90, 90);
    else if (e.key === "+" || e.key === "=") view.fov = clamp(view.fov / 1.1, FOV_MIN, FOV_MAX);
    else if (e.key === "-") view.fov = clamp(view.fov * 1.1, FOV_MIN, FOV_MAX);
    else if (e.key === "Escape") overlay.hidden = true;
    else return;
    e.preventDefault();
    render();
  });
  window.addEventListener("resize", render);

  function start() {
    fetch("/api/tour").then(function (r) {
      if (!r.ok) throw new Error("HTTP " + r.status);
      return r.json();
    }).then(function (t) {
      tour = t;
      document.getElementById("tour-title").textContent = t.title || t.id;
      var nav = document.getElementById("scenes");
      nav.innerHTML = "";
      t.scenes.forEach(function (s) {
        var b = document.createElement("button");
        b.dataset.scene = s.id;
        var img = document.createElement("img");
        img.src = "/api/scene/" + encodeURIComponent(s.id) + "/preview";
        img.alt = "";
        b.appendChild(img);
        b.appendChild(document.createTextNode(s.title || s.id));
        b.onclick = function () { loadScene(s.id); };
        nav.appendChild(b);
      });
      loadScene(t.start_scene);
      stage.focus();
    }).catch(function (e) { showError("Could not load the tour (" + e.message + ").", start); });
  }
  start();
})();
)";

/// (bundle-relative file name, contents) for every built-in asset.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 3> kFiles{{
    {"index.html", kIndexHtml},
    {"viewer.css", kViewerCss},
    {"viewer.js", kViewerJs},
}};

} // namespace vtour::builtin_viewer
