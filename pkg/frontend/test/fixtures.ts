/** Canonical apps and configurations shared by the flow tests.  Device ids
 *  deliberately overlap (one TV, one window) so the installs interfere. */

import { readFileSync } from "node:fs";

const TV = "aa".repeat(16);
const WINDOW = "bb".repeat(16);
const TSENSOR = "cc".repeat(16);
const WEATHER = "dd".repeat(16);
const VOICE = "ee".repeat(16);
const CAL = "ff".repeat(16);

export function appSource(name: string): string {
  const url = new URL(`../../tests/fixtures/apps/${name}.hgl`, import.meta.url);
  return readFileSync(url, "utf-8");
}

function configUri(app: string, bindings: Record<string, string | number>): string {
  const segments = Object.entries(bindings).map(([k, v]) => `${k}:${v}`);
  return `http://hub.local/appname:${app}/${segments.join("/")}`;
}

export const COMFORT_TV = {
  source: appSource("comfort_tv"),
  configUri: configUri("ComfortTV", {
    tv1: TV,
    window1: WINDOW,
    tSensor: TSENSOR,
    threshold1: 30,
  }),
};

export const COLD_DEFENDER = {
  source: appSource("cold_defender"),
  configUri: configUri("ColdDefender", { tv2: TV, window2: WINDOW, weather: WEATHER }),
};

export const CATCH_LIVE_SHOW = {
  source: appSource("catch_live_show"),
  configUri: configUri("CatchLiveShow", { voice: VOICE, tv3: TV, cal: CAL }),
};
