import { initApp } from "./main.js";

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", () => initApp(document));
} else {
  initApp(document);
}
