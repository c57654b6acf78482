// Argument tree panel with progressive disclosure: every node's support
// groups start collapsed and expand per click, so only one reasoning chain
// is in view at a time. Joined reasons render as a single bracketed unit.

import type { TreeGroup, TreeNode } from './tree.js';

export class TreeView {
  onSelect: (quoteId: number) => void = () => {};

  constructor(private container: HTMLElement) {}

  render(root: TreeNode): void {
    this.container.replaceChildren(this.renderNode(root, true));
  }

  private renderNode(node: TreeNode, isRoot: boolean): HTMLElement {
    const wrapper = document.createElement('div');
    wrapper.className = 'tree-node' + (isRoot ? ' tree-root' : '');
    wrapper.dataset.quoteId = String(node.quoteId);

    const header = document.createElement('div');
    header.className = 'tree-node-header' + (node.anchored ? '' : ' unanchored');
    const toggle = document.createElement('button');
    toggle.type = 'button';
    toggle.className = 'tree-toggle';
    toggle.textContent = node.groups.length > 0 ? '+' : '·';
    toggle.disabled = node.groups.length === 0;
    const label = document.createElement('span');
    label.className = 'tree-label';
    label.textContent = node.text || '(no anchor)';
    if (!node.anchored) label.title = 'this quote could not be located in the essay';
    header.append(toggle, label);
    wrapper.appendChild(header);

    const childrenBox = document.createElement('div');
    childrenBox.className = 'tree-children collapsed';
    for (const group of node.groups) {
      childrenBox.appendChild(this.renderGroup(group));
    }
    wrapper.appendChild(childrenBox);

    label.addEventListener('click', () => this.onSelect(node.quoteId));
    toggle.addEventListener('click', () => {
      const collapsed = childrenBox.classList.toggle('collapsed');
      toggle.textContent = collapsed ? '+' : '-';
    });
    return wrapper;
  }

  private renderGroup(group: TreeGroup): HTMLElement {
    const box = document.createElement('div');
    box.className = `tree-group strength-${group.strength}` + (group.joined ? ' joined' : '');
    box.dataset.relationIndex = String(group.relationIndex);
    const badge = document.createElement('span');
    badge.className = 'strength-badge';
    badge.textContent =
      group.strength === 'valid' ? 'ok' : group.strength === 'invalid' ? 'flawed' : 'unchecked';
    box.appendChild(badge);
    if (group.joined) {
      const joinedBadge = document.createElement('span');
      joinedBadge.className = 'joined-badge';
      joinedBadge.textContent = 'joined';
      joinedBadge.title = 'these reasons only work together';
      box.appendChild(joinedBadge);
    }
    for (const member of group.members) {
      box.appendChild(this.renderNode(member, false));
    }
    return box;
  }
}
