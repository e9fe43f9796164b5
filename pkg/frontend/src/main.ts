/** Browser bootstrap: wire the upload form and the app panel together. */

import { ApiClient } from "./api.js";
import { App } from "./ui.js";

declare global {
  interface Window {
    FACEXPLAIN_API?: string;
  }
}

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? window.FACEXPLAIN_API ?? "";
}

function bootstrap(): void {
  const root = document.getElementById("app");
  const fileA = document.getElementById("file-a") as HTMLInputElement | null;
  const fileB = document.getElementById("file-b") as HTMLInputElement | null;
  const verifyButton = document.getElementById("verify-button") as HTMLButtonElement | null;
  if (!root || !fileA || !fileB || !verifyButton) {
    throw new Error("index.html is missing the expected elements");
  }
  const app = new App(root, new ApiClient(apiBase()));
  verifyButton.addEventListener("click", () => {
    const a = fileA.files?.[0];
    const b = fileB.files?.[0];
    if (a && b) void app.handleUpload(a, b);
  });
}

bootstrap();
