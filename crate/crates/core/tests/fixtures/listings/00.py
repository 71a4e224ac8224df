"""Secondary Structure dataset."""

import numpy as np
from megatron import print_rank_0
from .data import ProteinPredictionAbstractDataset
from .data import build_tokens_paddings_from_text

class SecondaryStructureDataset(ProteinPredictionAbstractDataset):
    def __init__(self,
                name: str,
                datapaths,
                tokenizer,
                max_seq_length: int):
        super().__init__('secondary_structure', name, datapaths, tokenizer, max_seq_length)


    def build_samples(self, ids, paddings, label, unique_id, seq_len):
        """Convert to numpy and return a sample consumed by the batch producer."""

        # Seperate inputs and labels in lists
        input_tokens = [self.tokenizer.tokenize(seq) for seq in ids]
        input_tokens = [token for seq in input_tokens for token in seq]
        labels = [self.tokenizer.tokenize(seq) for seq in label]
        labels = [label for seq in labels for label in seq]

        # Add special tokens
        input_tokens, labels = self.add_special_tokens(input_tokens, labels)

        # Truncate and pad
        input_tokens, labels, paddings = self.truncate_and_pad(input_tokens, labels,
                                                               self
