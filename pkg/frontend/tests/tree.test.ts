import { describe, expect, it } from 'vitest';

import { buildSupportTree, countNodes } from '../src/tree.js';
import { TreeView } from '../src/treeView.js';
import { fixtureResult } from './stubServer.js';
import type { PipelineResultDoc } from '../src/types.js';

function joinedFixture(): PipelineResultDoc {
  const result = fixtureResult();
  // replace the flat relations with a joined pair {1,2} -> 0 and 3 -> 1
  result.analysis.claim.support_relations.relations = [
    [[1, 2], 0],
    [3, 1],
  ];
  result.evaluated.analysis = result.analysis;
  result.evaluated.evaluations = {
    '0': result.evaluated.evaluations['0'],
    '1': result.evaluated.evaluations['1'],
  };
  return result;
}

describe('buildSupportTree', () => {
  it('keeps joined reasons together as one group', () => {
    const tree = buildSupportTree(joinedFixture());
    expect(tree.quoteId).toBe(0);
    expect(tree.groups).toHaveLength(1);
    const group = tree.groups[0];
    expect(group.joined).toBe(true);
    expect(group.members.map((m) => m.quoteId)).toEqual([1, 2]);
    // nested support hangs under quote 1
    expect(group.members[0].groups[0].members[0].quoteId).toBe(3);
  });

  it('carries relation validity onto groups', () => {
    const tree = buildSupportTree(fixtureResult());
    const strengths = tree.groups.map((g) => g.strength);
    expect(strengths).toEqual(['valid', 'invalid', 'invalid', 'valid']);
  });

  it('terminates with a sane node count', () => {
    const tree = buildSupportTree(fixtureResult());
    expect(countNodes(tree)).toBe(5);
  });
});

describe('TreeView', () => {
  it('starts with children collapsed and expands per click', () => {
    const container = document.createElement('div');
    document.body.appendChild(container);
    const view = new TreeView(container);
    view.render(buildSupportTree(fixtureResult()));
    const rootChildren = container.querySelector('.tree-root > .tree-children')!;
    expect(rootChildren.classList.contains('collapsed')).toBe(true);
    (container.querySelector('.tree-root > .tree-node-header .tree-toggle') as HTMLButtonElement).click();
    expect(rootChildren.classList.contains('collapsed')).toBe(false);
  });

  it('marks flawed groups and joined units distinctly', () => {
    const container = document.createElement('div');
    const view = new TreeView(container);
    view.render(buildSupportTree(joinedFixture()));
    expect(container.querySelector('.tree-group.joined')).not.toBeNull();
    expect(container.querySelectorAll('.joined-badge')).toHaveLength(1);
  });

  it('selecting a label reports the quote id', () => {
    const container = document.createElement('div');
    const view = new TreeView(container);
    const selected: number[] = [];
    view.onSelect = (quoteId) => selected.push(quoteId);
    view.render(buildSupportTree(fixtureResult()));
    (container.querySelector('.tree-root > .tree-node-header .tree-label') as HTMLElement).click();
    expect(selected).toEqual([0]);
  });
});
