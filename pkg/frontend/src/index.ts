export {
  Backbone,
  BackboneConfig,
  DEFAULT_BACKBONE,
  EcaAttention,
  MsgcBlock,
  MsgcBlockConfig,
  MsgcModule,
  MsgcModuleConfig,
  dilateKernel,
  groupConv,
  validateModuleConfig,
} from "./msgc";
export { NetVlad, NetVladConfig } from "./netvlad";
export { ModelConfig, RetrievalModel } from "./model";
export { DEFAULT_MARGIN, tripletLoss, tripletLossRef } from "./loss";
export { makeToyDataset, ToyDataset, ToyDatasetConfig } from "./data";
export { trainTriplets, TrainOptions, TrainResult } from "./train";
export {
  cosineSimilarity,
  Described,
  exportMatches,
  rankMatches,
  readDescriptors,
  recallAtN,
  TOP_K,
  writeBeaconsCsv,
  writeDescriptors,
} from "./retrieval";
export { DEFAULT_TRAINING, loadTrainingConfig, TrainingConfig } from "./config";
