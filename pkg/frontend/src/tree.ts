// Manifest entries -> collapsible tree, grouped by source with the
// original directory structure preserved (entry paths already carry the
// "<source>/" prefix, so sources are simply the top-level directories).

import { ManifestEntry } from "./types.js";

export interface TreeNode {
  name: string;
  path: string; // full path from the manifest root, "" for the synthetic root
  kind: "dir" | "file";
  children: TreeNode[];
  entry?: ManifestEntry;
  fileCount: number;
  eventTotal: number;
}

function newDir(name: string, path: string): TreeNode {
  return { name, path, kind: "dir", children: [], fileCount: 0, eventTotal: 0 };
}

/** Build one tree root per source; every manifest entry becomes exactly one
 * file node under its directory chain. */
export function buildTree(entries: ManifestEntry[]): TreeNode[] {
  const root = newDir("", "");
  const dirs = new Map<string, TreeNode>([["", root]]);

  const dirFor = (path: string): TreeNode => {
    const known = dirs.get(path);
    if (known) return known;
    const slash = path.lastIndexOf("/");
    const parent = dirFor(slash === -1 ? "" : path.slice(0, slash));
    const node = newDir(slash === -1 ? path : path.slice(slash + 1), path);
    parent.children.push(node);
    dirs.set(path, node);
    return node;
  };

  for (const entry of entries) {
    const slash = entry.path.lastIndexOf("/");
    const dir = dirFor(slash === -1 ? "" : entry.path.slice(0, slash));
    dir.children.push({
      name: slash === -1 ? entry.path : entry.path.slice(slash + 1),
      path: entry.path,
      kind: "file",
      children: [],
      entry,
      fileCount: 1,
      eventTotal: entry.event_count,
    });
  }

  const finish = (node: TreeNode): TreeNode => {
    node.children.sort((a, b) =>
      a.kind !== b.kind ? (a.kind === "dir" ? -1 : 1) : a.name < b.name ? -1 : 1,
    );
    for (const child of node.children) {
      if (child.kind === "dir") finish(child);
      node.fileCount += child.fileCount;
      node.eventTotal += child.eventTotal;
    }
    return node;
  };
  return finish(root).children;
}

export function countFiles(roots: TreeNode[]): number {
  return roots.reduce((n, r) => n + r.fileCount, 0);
}

export function countEvents(roots: TreeNode[]): number {
  return roots.reduce((n, r) => n + r.eventTotal, 0);
}
