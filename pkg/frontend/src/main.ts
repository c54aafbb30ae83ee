/** Browser bootstrap: mount the app against the serving origin. */

import { ApiClient } from "./api.js";
import { mountApp } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
mountApp(document, root, new ApiClient(""));
