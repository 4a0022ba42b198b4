from .adam import Adam
from .dataset import DATASET_MAGIC, Dataset, load_dataset, save_dataset
