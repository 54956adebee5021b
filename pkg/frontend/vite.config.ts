import { defineConfig } from "vitest/config";

export default defineConfig({
    // relative asset URLs so the bundle works mounted at /ui/
    base: "./",
    build: {
        outDir: "dist",
    },
    server: {
        proxy: {
            // dev-mode proxy to a locally running annotation service
            "/t0": "http://127.0.0.1:8321",
            "/t1a": "http://127.0.0.1:8321",
            "/t1b": "http://127.0.0.1:8321",
            "/t2": "http://127.0.0.1:8321",
            "/claims": "http://127.0.0.1:8321",
            "/conflicts": "http://127.0.0.1:8321",
            "/folds": "http://127.0.0.1:8321",
            "/reviews": "http://127.0.0.1:8321",
            "/export": "http://127.0.0.1:8321",
            "/paragraphs": "http://127.0.0.1:8321",
            "/search": "http://127.0.0.1:8321",
            "/health": "http://127.0.0.1:8321",
        },
    },
    test: {
        environment: "jsdom",
    },
});
