// Support tree for the visual explorer: expands the main claim down to the
// axioms, keeping joined reasons together as one group per relation. Each
// group carries its relation's validity so the view can show a neutral check
// on sound links and a warning on flawed ones.

import type { PipelineResultDoc } from './types.js';
import { relationSources, relationTarget } from './decorations.js';

export type GroupStrength = 'valid' | 'invalid' | 'unevaluated';

export interface TreeGroup {
  relationIndex: number;
  strength: GroupStrength;
  joined: boolean;
  members: TreeNode[];
}

export interface TreeNode {
  quoteId: number;
  text: string;
  anchored: boolean;
  groups: TreeGroup[];
}

export function buildSupportTree(result: PipelineResultDoc): TreeNode {
  const relations = result.analysis.claim.support_relations.relations;
  const quotes = result.analysis.claim.support_relations.quotes;
  const evaluations = result.evaluated.evaluations;

  const textFor = (quoteId: number): string =>
    quoteId === 0 ? result.analysis.claim.claim_quote : (quotes[String(quoteId)] ?? '');

  const strengthFor = (relationIndex: number): GroupStrength => {
    const evaluation = evaluations[String(relationIndex)];
    if (!evaluation) return 'unevaluated';
    return evaluation.evaluation.strength;
  };

  const build = (quoteId: number, path: Set<number>): TreeNode => {
    const groups: TreeGroup[] = [];
    relations.forEach((entry, index) => {
      if (relationTarget(entry) !== quoteId) return;
      const sources = relationSources(entry);
      if (sources.some((source) => path.has(source))) return; // defensive: server data is acyclic
      const nextPath = new Set(path).add(quoteId);
      groups.push({
        relationIndex: index,
        strength: strengthFor(index),
        joined: sources.length > 1,
        members: sources.map((source) => build(source, nextPath)),
      });
    });
    return {
      quoteId,
      text: textFor(quoteId),
      anchored: String(quoteId) in result.anchors,
      groups,
    };
  };

  return build(0, new Set());
}

export function countNodes(node: TreeNode): number {
  return 1 + node.groups.reduce((sum, group) => sum + group.members.reduce((s, m) => s + countNodes(m), 0), 0);
}
